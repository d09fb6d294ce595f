"""Command-line interface.

Subcommands: systems, gamma-report, lie-dim, optimize, top-curve, evaluate,
compare, trotter, project-trajectory.  Every run writes a JSON manifest
(inputs, seeds, version, wall time) next to its data files.  All times are
seconds, amplitudes and couplings Hz, rates 1/s; unit labels are embedded in
the output headers.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import (compare_open_vs_time_optimal, cross_evaluate, derive_seed,
                          top_curve, write_manifest, write_scatter_csv,
                          write_top_curve_csv)
from .grape import OptimizerConfig, optimize
from .liealg import lie_closure
from .pauli import string_sum, parse_string_sum, ad_superop
from .propagation import (ControlSequence, fidelity_open, fidelity_phase_invariant,
                          fidelity_projected, load_sequence, propagate_closed,
                          propagate_open, save_sequence, trajectory_projections)
from .relaxation import (blocks_in_gamma_basis, classify_modes, gamma_full,
                         gamma_pure_t2, DEFAULT_CUTS)
from .systems import (CNOT, ControlSystem, bell_encoding, by_name,
                      lift_logical_gate, restrict_to_protected, system_I, system_II)
from .trotter import (cnot_plan, compile_trotter_cnot, control_power,
                      quasi_period_search)


class ConfigError(Exception):
    pass


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from e


def _merged(args, config: dict, key: str, default=None):
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    return config.get(key, default)


def _make_relaxation(choice: str | None):
    if choice in (None, "none"):
        return None
    if choice == "pure-t2":
        return gamma_pure_t2()
    if choice == "full":
        return gamma_full()
    raise ConfigError(f"unknown relaxation model {choice!r} "
                      "(expected none | pure-t2 | full)")


def _make_system(args, config: dict) -> ControlSystem:
    name = _merged(args, config, "system", "system-II")
    gamma = _make_relaxation(_merged(args, config, "gamma", "none"))
    spec = config.get("system_spec")
    if spec is not None:
        drift = string_sum(parse_string_sum(spec["drift"]))
        controls = [string_sum(parse_string_sum(c)) for c in spec["controls"]]
        n = int(np.log2(drift.shape[0]))
        return ControlSystem(n, drift, controls, relaxation=gamma,
                             name=spec.get("name", "custom"))
    kwargs = {}
    for key in ("J_xx", "J_zz", "J_xyz"):
        if key in config:
            kwargs[key] = config[key]
    if getattr(args, "j_xx", None) is not None:
        kwargs["J_xx"] = args.j_xx
    sys_obj = by_name(name, **kwargs)
    return sys_obj.with_relaxation(gamma)


def _make_target(choice: str, dim: int) -> tuple[np.ndarray, np.ndarray | None]:
    """Returns (U_target_physical, F_target or None)."""
    if choice == "identity":
        return np.eye(dim, dtype=complex), None
    if choice == "cnot":
        if dim != 16:
            raise ConfigError("the cnot target is defined for the 4-qubit systems")
        U_phys, F_target = lift_logical_gate(CNOT)
        return U_phys, F_target
    p = Path(choice)
    if p.exists():
        U = np.load(p)
        if U.shape != (dim, dim):
            raise ConfigError(f"target in {choice} has shape {U.shape}, expected {(dim, dim)}")
        return U.astype(complex), None
    raise ConfigError(f"unknown target {choice!r} (expected cnot | identity | .npy file)")


def _outdir(args) -> Path:
    out = Path(getattr(args, "output_dir", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands

def cmd_systems(args):
    config = _load_config(args.config)
    rows = []
    for name, builder in (("system-I", system_I), ("system-II", system_II)):
        s = builder()
        w = np.linalg.eigvalsh(s.drift)
        rows.append({"name": name, "n_qubits": s.n_qubits,
                     "drift_eigenvalues_Hz": [round(float(v), 9) for v in w],
                     "n_controls": len(s.controls)})
        print(f"{name}: {s.n_qubits} qubits, {len(s.controls)} controls, "
              f"drift spectrum [{w.min():+.4f}, {w.max():+.4f}] Hz")
    out = _outdir(args)
    write_manifest(out / "systems.json", config={"command": "systems"},
                   extra={"systems": rows})
    return 0


def cmd_gamma_report(args):
    config = _load_config(args.config)
    model_name = _merged(args, config, "model", "full")
    model = _make_relaxation(model_name if model_name != "none" else "full")
    cuts = tuple(_merged(args, config, "cuts", DEFAULT_CUTS))
    classes = classify_modes(model, cuts)
    w, _ = model.eigensystem()
    hist = {}
    for v in w:
        key = round(float(v), 6)
        hist[key] = hist.get(key, 0) + 1
    out = _outdir(args)
    with open(out / "gamma_spectrum.csv", "w", newline="") as fh:
        cw = csv.writer(fh)
        cw.writerow(["eigenvalue_per_s", "multiplicity"])
        for k in sorted(hist):
            cw.writerow([k, hist[k]])
    blocks = {}
    for name, builder in (("system-I", system_I), ("system-II", system_II)):
        B = blocks_in_gamma_basis(ad_superop(builder().drift), model, classes)
        blocks[name] = B.tolist()
    with open(out / "gamma_blocks.csv", "w", newline="") as fh:
        cw = csv.writer(fh)
        cw.writerow(["system", "row_band", "slow", "medium", "fast"])
        for name, B in blocks.items():
            for rb, row in zip(("slow", "medium", "fast"), B):
                cw.writerow([name, rb] + [f"{v:.6e}" for v in row])
    write_manifest(out / "gamma_report.json",
                   config={"command": "gamma-report", "model": model_name,
                           "cuts_per_s": list(cuts)},
                   extra={"band_sizes": classes.sizes(),
                          "spectrum_histogram": {str(k): v for k, v in sorted(hist.items())},
                          "block_norms": blocks,
                          "calibration": model.calibration})
    print(f"gamma '{model_name}': bands {classes.sizes()} at cuts {cuts} 1/s")
    for k in sorted(hist):
        print(f"  {k:>10.4f} 1/s  x{hist[k]}")
    return 0


def cmd_lie_dim(args):
    config = _load_config(args.config)
    system = _make_system(args, config)
    tol = _merged(args, config, "tol", 1e-9)
    if args.restricted:
        enc = bell_encoding()
        gens = [restrict_to_protected(ad_superop(H), enc)
                for H in [system.drift, *system.controls]]
    else:
        gens = [system.drift, *system.controls]
    res = lie_closure(gens, tol=tol)
    print(res.dimension)
    out = _outdir(args)
    write_manifest(out / "lie_dim.json",
                   config={"command": "lie-dim", "system": system.name,
                           "restricted": bool(args.restricted), "tol": tol},
                   extra={"dimension": res.dimension,
                          "generations": res.generations,
                          "basis_norms": res.basis_norms().tolist(),
                          "truncated": res.truncated})
    return 0


def _optimizer_config(args, config: dict) -> OptimizerConfig:
    return OptimizerConfig(
        dt=float(_merged(args, config, "dt", 0.05)),
        max_iterations=int(_merged(args, config, "iterations", 1000)),
        restarts=int(_merged(args, config, "restarts", 1)),
        seed=int(_merged(args, config, "seed", 0)),
        u0=float(_merged(args, config, "u0", 10.0)),
        u_max=_merged(args, config, "u-max", None),
        alpha=float(_merged(args, config, "alpha", 1.0)),
        step_policy=_merged(args, config, "step-policy", "linesearch"),
        fidelity_target=_merged(args, config, "fidelity-target", None),
    )


def _warn_coarse(cfg: OptimizerConfig, seq: ControlSequence | None = None):
    u = cfg.u_max if cfg.u_max is not None else cfg.u0
    if seq is not None:
        u = np.abs(seq.amplitudes).max()
    if u * cfg.dt > 0.1:
        print(f"warning: max|u|*dt = {u * cfg.dt:.2f} cycles per slot exceeds 0.1; "
              "consider a finer dt", file=sys.stderr)


def cmd_optimize(args):
    config = _load_config(args.config)
    system = _make_system(args, config)
    cfg = _optimizer_config(args, config)
    T = float(_merged(args, config, "T", 10.0))
    target_name = _merged(args, config, "target", "cnot")
    U_target, _ = _make_target(target_name, system.dim)
    projected = bool(_merged(args, config, "projected", target_name == "cnot"))
    encoding = bell_encoding() if (projected and system.dim == 16) else None
    _warn_coarse(cfg)
    t0 = time.perf_counter()
    res = optimize(system, U_target, T, cfg, encoding=encoding)
    wall = time.perf_counter() - t0
    out = _outdir(args)
    pulse_path = out / "pulse.txt"
    save_sequence(res.best_sequence, pulse_path)
    write_manifest(out / "optimize.json",
                   config={"command": "optimize", "system": system.name,
                           "gamma": _merged(args, config, "gamma", "none"),
                           "target": target_name, "T_seconds": T,
                           "projected": projected, "optimizer": vars(cfg)},
                   seeds={"master": cfg.seed},
                   extra={"fidelity": res.best_fidelity,
                          "restart_fidelities": res.restart_fidelities,
                          "iterations": res.iterations,
                          "stop_reason": res.stop_reason,
                          "wall_seconds": wall,
                          "pulse_file": pulse_path.name})
    print(f"fidelity {res.best_fidelity:.6f} after {res.iterations} iterations "
          f"({res.stop_reason}); pulse written to {pulse_path}")
    return 0


def cmd_top_curve(args):
    config = _load_config(args.config)
    system = _make_system(args, config).with_relaxation(None)
    cfg = _optimizer_config(args, config)
    grid = _merged(args, config, "T-grid", "2,4,6,8,10")
    if isinstance(grid, str):
        T_list = [float(x) for x in grid.split(",") if x.strip()]
    else:
        T_list = [float(x) for x in grid]
    family = int(_merged(args, config, "family-size", 15))
    target_name = _merged(args, config, "target", "cnot")
    U_target, _ = _make_target(target_name, system.dim)
    encoding = bell_encoding() if (system.dim == 16 and target_name == "cnot") else None
    curve = top_curve(system, U_target, T_list, cfg, family_size=family,
                      encoding=encoding)
    out = _outdir(args)
    write_top_curve_csv(curve, out / "top_curve.csv")
    for k, e in enumerate(curve.entries):
        for i, seq in enumerate(e.sequences):
            save_sequence(seq, out / f"pulse_T{e.T:g}_m{i:02d}.txt")
    write_manifest(out / "top_curve.json",
                   config={"command": "top-curve", "system": system.name,
                           "target": target_name, "T_grid_seconds": T_list,
                           "family_size": family, "optimizer": vars(cfg)},
                   seeds={"master": cfg.seed,
                          "member_seeds": {f"{k}:{i}": derive_seed(cfg.seed, k, i)
                                           for k in range(len(T_list))
                                           for i in range(family)}},
                   extra={"entries": [{"T": e.T, "mean": e.mean, "rmsd": e.rmsd,
                                       "min": e.min, "max": e.max}
                                      for e in curve.entries]})
    for e in curve.entries:
        print(f"T={e.T:g}s: mean {e.mean:.4f} rmsd {e.rmsd:.4f} "
              f"range [{e.min:.4f}, {e.max:.4f}]")
    return 0


def cmd_evaluate(args):
    config = _load_config(args.config)
    system = _make_system(args, config)
    seq = load_sequence(args.pulse_file)
    target_name = _merged(args, config, "target", "cnot")
    U_target, _ = _make_target(target_name, system.dim)
    record = {"pulse_file": args.pulse_file,
              "duration_seconds": seq.duration,
              "control_power_Hz": control_power(seq)}
    U = propagate_closed(system, seq).final
    record["closed_phase_invariant"] = fidelity_phase_invariant(U, U_target)
    if system.dim == 16 and target_name == "cnot":
        enc = bell_encoding()
        _, F_target = lift_logical_gate(CNOT)
        Fc = np.kron(U.conj(), U)
        record["closed_projected"] = fidelity_projected(Fc, F_target, enc.projector)
        if system.relaxation is not None:
            F = propagate_open(system, seq).final
            record["open_projected"] = fidelity_projected(F, F_target, enc.projector)
            record["open_full"] = fidelity_open(F, F_target)
    elif system.relaxation is not None:
        F = propagate_open(system, seq).final
        record["open_full"] = fidelity_open(F, np.kron(U_target.conj(), U_target))
    out = _outdir(args)
    write_manifest(out / "evaluate.json",
                   config={"command": "evaluate", "system": system.name,
                           "gamma": _merged(args, config, "gamma", "none"),
                           "target": target_name},
                   extra=record)
    for k, v in record.items():
        print(f"{k}: {v}")
    return 0


def cmd_compare(args):
    config = _load_config(args.config)
    system = _make_system(args, config)
    if system.relaxation is None:
        raise ConfigError("compare needs --gamma pure-t2 or full")
    cfg = _optimizer_config(args, config)
    T = float(_merged(args, config, "T", 10.0))
    family = int(_merged(args, config, "family-size", 15))
    target_name = _merged(args, config, "target", "cnot")
    U_target, _ = _make_target(target_name, system.dim)
    encoding = bell_encoding() if system.dim == 16 else None
    report = compare_open_vs_time_optimal(system, U_target, T, cfg,
                                          encoding=encoding, family_size=family)
    out = _outdir(args)
    write_scatter_csv(report["cross"], out / "scatter.csv")
    save_sequence(report["open_grape"].best_sequence, out / "pulse_open.txt")
    write_manifest(out / "compare.json",
                   config={"command": "compare", "system": system.name,
                           "gamma": _merged(args, config, "gamma", "none"),
                           "target": target_name, "T_seconds": T,
                           "family_size": family, "optimizer": vars(cfg)},
                   extra={"open_grape_fidelity": report["open_grape"].best_fidelity,
                          "family_mean_under_gamma": report["cross"]["mean"],
                          "family_rmsd_under_gamma": report["cross"]["rmsd"],
                          "family_range": [report["cross"]["min"], report["cross"]["max"]],
                          "z_score": report["z_score"]})
    z = report["z_score"]
    print(f"relaxation-aware: {report['open_grape'].best_fidelity:.4f}; family under "
          f"relaxation: {report['cross']['mean']:.4f} +- {report['cross']['rmsd']:.4f} "
          f"(z = {'undefined' if z is None else f'{z:.2f}'})")
    return 0


def cmd_trotter(args):
    config = _load_config(args.config)
    if args.plan_file:
        raw = json.loads(Path(args.plan_file).read_text())
        from .trotter import TrotterPlan
        plan = TrotterPlan(n1=raw["n1"], n2=raw["n2"],
                           segments=[tuple(s) for s in raw["segments"]],
                           pulse_amplitude=raw.get("pulse_amplitude", 5e5),
                           J_xx=raw.get("J_xx", np.sqrt(5.0)),
                           J_int=raw.get("J_int", 1.0))
    else:
        plan = cnot_plan(n1=int(_merged(args, config, "n1", 2)),
                         n2=int(_merged(args, config, "n2", 64)),
                         J_xx=float(_merged(args, config, "J-xx", np.sqrt(5.0))),
                         pulse_amplitude=float(_merged(args, config, "pulse-amplitude", 5e5)))
    seq = compile_trotter_cnot(plan)
    system = system_II(J_xx=plan.J_xx, J_xyz=plan.J_int)
    enc = bell_encoding()
    _, F_target = lift_logical_gate(CNOT)
    U = propagate_closed(system, seq).final
    Fc = np.kron(U.conj(), U)
    report = {
        "duration_seconds": seq.duration,
        "n_slots": seq.n_slots,
        "control_power_Hz": control_power(seq),
        "closed_projected_fidelity": fidelity_projected(Fc, F_target, enc.projector),
    }
    gamma_choice = _merged(args, config, "gamma", "full")
    if gamma_choice != "none":
        open_sys = system.with_relaxation(_make_relaxation(gamma_choice))
        F = propagate_open(open_sys, seq).final
        report["open_projected_fidelity"] = fidelity_projected(F, F_target, enc.projector)
    out = _outdir(args)
    save_sequence(seq, out / "pulse_trotter.txt")
    write_manifest(out / "trotter.json",
                   config={"command": "trotter", "n1": plan.n1, "n2": plan.n2,
                           "J_xx_Hz": plan.J_xx,
                           "pulse_amplitude_Hz": plan.pulse_amplitude,
                           "gamma": gamma_choice},
                   extra=report)
    for k, v in report.items():
        print(f"{k}: {v}")
    return 0


def cmd_project_trajectory(args):
    config = _load_config(args.config)
    system = _make_system(args, config)
    if system.relaxation is None:
        raise ConfigError("project-trajectory needs --gamma pure-t2 or full")
    seq = load_sequence(args.pulse_file)
    enc = bell_encoding()
    rows = trajectory_projections(system, seq, enc)
    out = _outdir(args)
    with open(out / "trajectory.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_seconds", "state_index", "p_slow", "p_fast"])
        for r in rows:
            w.writerow([r["t"], r["state_index"], r["p_slow"], r["p_fast"]])
    write_manifest(out / "trajectory.json",
                   config={"command": "project-trajectory", "system": system.name,
                           "gamma": _merged(args, config, "gamma", "none"),
                           "pulse_file": args.pulse_file},
                   extra={"rows": len(rows)})
    print(f"wrote {len(rows)} rows to {out / 'trajectory.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="opengrape",
                                description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file; flags override its fields")
        sp.add_argument("--output-dir", help="directory for output artifacts")
        sp.add_argument("--system", help="system-I | system-II")
        sp.add_argument("--gamma", help="none | pure-t2 | full")
        sp.add_argument("--seed", type=int)
        return sp

    common(sub.add_parser("systems", help="list the built-in model systems"))

    g = common(sub.add_parser("gamma-report", help="relaxation spectrum and block norms"))
    g.add_argument("--model", help="pure-t2 | full")
    g.add_argument("--cuts", type=float, nargs=2, metavar=("LO", "HI"))

    l = common(sub.add_parser("lie-dim", help="Lie-closure dimension of a system"))
    l.add_argument("--restricted", action="store_true",
                   help="restrict generators to the protected block")
    l.add_argument("--tol", type=float)

    def opt_flags(sp):
        sp.add_argument("--target", help="cnot | identity | .npy file")
        sp.add_argument("--T", type=float, help="final time, seconds")
        sp.add_argument("--dt", type=float, help="slot duration, seconds")
        sp.add_argument("--restarts", type=int)
        sp.add_argument("--iterations", type=int)
        sp.add_argument("--u-max", type=float)
        sp.add_argument("--u0", type=float)
        return sp

    opt_flags(common(sub.add_parser("optimize", help="run GRAPE")))

    t = opt_flags(common(sub.add_parser("top-curve", help="closed-system top curve")))
    t.add_argument("--T-grid", help="comma-separated final times, seconds")
    t.add_argument("--family-size", type=int)

    e = common(sub.add_parser("evaluate", help="evaluate a pulse file"))
    e.add_argument("pulse_file")
    e.add_argument("--target")

    c = opt_flags(common(sub.add_parser("compare",
                                        help="relaxation-aware vs time-optimal")))
    c.add_argument("--family-size", type=int)

    tr = common(sub.add_parser("trotter", help="compile and score the bang-bang CNOT"))
    tr.add_argument("--plan-file", help="JSON plan (overrides the preset)")
    tr.add_argument("--n1", type=int)
    tr.add_argument("--n2", type=int)
    tr.add_argument("--J-xx", type=float)
    tr.add_argument("--pulse-amplitude", type=float)

    pj = common(sub.add_parser("project-trajectory",
                               help="slow/fast-subspace weights along a pulse"))
    pj.add_argument("pulse_file")

    return p


_COMMANDS = {
    "systems": cmd_systems,
    "gamma-report": cmd_gamma_report,
    "lie-dim": cmd_lie_dim,
    "optimize": cmd_optimize,
    "top-curve": cmd_top_curve,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "trotter": cmd_trotter,
    "project-trajectory": cmd_project_trajectory,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except (np.linalg.LinAlgError, FloatingPointError, OverflowError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
