"""Protocol drivers: top curves of closed-system quality against duration,
cross-evaluation of closed-optimized pulse families under relaxation, and the
relaxation-aware vs. time-optimal comparison.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .grape import OptimizerConfig, OptimizationResult, optimize
from .propagation import ControlSequence, fidelity_projected, fidelity_open, propagate_open
from .systems import ControlSystem, EncodingMap

__all__ = [
    "TopCurveEntry", "TopCurve", "derive_seed",
    "top_curve", "cross_evaluate", "compare_open_vs_time_optimal",
    "write_top_curve_csv", "write_scatter_csv", "write_manifest",
]


def derive_seed(master: int, *indices: int) -> int:
    """Stable member seed: the first word of SeedSequence([master, *indices]).

    Frozen so that published CSVs are reproducible from (master seed, grid
    position, family member) alone.
    """
    ss = np.random.SeedSequence([int(master), *map(int, indices)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class TopCurveEntry:
    T: float
    mean: float
    rmsd: float
    min: float
    max: float
    fidelities: list[float]
    sequences: list[ControlSequence]


@dataclass
class TopCurve:
    entries: list[TopCurveEntry] = field(default_factory=list)

    def sorted(self) -> "TopCurve":
        return TopCurve(sorted(self.entries, key=lambda e: e.T))


def _stats(values: list[float]) -> tuple[float, float, float, float]:
    arr = np.asarray(values, dtype=float)
    rmsd = float(arr.std(ddof=0)) if arr.size > 1 else 0.0
    return float(arr.mean()), rmsd, float(arr.min()), float(arr.max())


def top_curve(system: ControlSystem, target: np.ndarray, T_list,
              config: OptimizerConfig, family_size: int = 15,
              encoding: EncodingMap | None = None) -> TopCurve:
    """Closed-system quality-vs-duration curve.

    For each T, `family_size` independent multi-start optimizations are run
    (member i at grid point k uses derive_seed(config.seed, k, i)) and the
    family statistics plus all optimized sequences are recorded.
    """
    T_list = list(T_list)
    if not T_list:
        raise ValueError("empty T grid")
    if system.relaxation is not None:
        system = system.with_relaxation(None)
    curve = TopCurve()
    for k, T in enumerate(T_list):
        fids, seqs = [], []
        for i in range(family_size):
            member = replace(config, seed=derive_seed(config.seed, k, i))
            res = optimize(system, target, T, member, encoding=encoding)
            fids.append(res.best_fidelity)
            seqs.append(res.best_sequence)
        mean, rmsd, fmin, fmax = _stats(fids)
        curve.entries.append(TopCurveEntry(T=float(T), mean=mean, rmsd=rmsd,
                                           min=fmin, max=fmax,
                                           fidelities=fids, sequences=seqs))
    return curve.sorted()


def cross_evaluate(entry: TopCurveEntry, system_open: ControlSystem,
                   target: np.ndarray, encoding: EncodingMap | None = None) -> dict:
    """Score a closed-optimized family under the open-system dynamics."""
    if system_open.relaxation is None:
        raise ValueError("cross evaluation needs a relaxation model")
    if target.shape == (system_open.dim, system_open.dim):
        F_target = np.kron(target.conj(), target)
    else:
        F_target = target
    values = []
    for seq in entry.sequences:
        F = propagate_open(system_open, seq).final
        if encoding is not None:
            values.append(fidelity_projected(F, F_target, encoding.projector))
        else:
            values.append(fidelity_open(F, F_target))
    mean, rmsd, fmin, fmax = _stats(values)
    return {"T": entry.T, "closed_fidelities": entry.fidelities,
            "open_fidelities": values,
            "mean": mean, "rmsd": rmsd, "min": fmin, "max": fmax}


def compare_open_vs_time_optimal(system_open: ControlSystem, target: np.ndarray,
                                 T: float, config: OptimizerConfig,
                                 encoding: EncodingMap | None = None,
                                 family_size: int = 15,
                                 family_config: OptimizerConfig | None = None) -> dict:
    """Relaxation-aware optimization vs. a family optimized ignoring relaxation.

    Returns both sets of results and the z-score of the relaxation-aware
    fidelity against the cross-evaluated family distribution (None when the
    family is degenerate).
    """
    open_result = optimize(system_open, target, T, config, encoding=encoding)
    fam_config = family_config if family_config is not None else config
    closed_curve = top_curve(system_open.with_relaxation(None), target, [T],
                             fam_config, family_size=family_size, encoding=encoding)
    cross = cross_evaluate(closed_curve.entries[0], system_open, target, encoding)
    if cross["rmsd"] > 0:
        z = (open_result.best_fidelity - cross["mean"]) / cross["rmsd"]
    else:
        z = None
    return {"open_grape": open_result, "family": closed_curve.entries[0],
            "cross": cross, "z_score": z}


# ---------------------------------------------------------------------------
# exports

def write_top_curve_csv(curve: TopCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["T_seconds", "mean", "rmsd", "min", "max"])
        for e in curve.entries:
            w.writerow([e.T, e.mean, e.rmsd, e.min, e.max])


def write_scatter_csv(cross: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sequence_id", "closed_fidelity", "open_fidelity"])
        for i, (fc, fo) in enumerate(zip(cross["closed_fidelities"],
                                         cross["open_fidelities"])):
            w.writerow([i, fc, fo])


def write_manifest(path, config: dict, seeds: dict | None = None,
                   extra: dict | None = None) -> dict:
    from . import __version__
    manifest = {
        "config": config,
        "seeds": seeds or {},
        "version": __version__,
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    if extra:
        manifest.update(extra)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, default=_json_default)
        fh.write("\n")
    return manifest


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, OptimizerConfig):
        return vars(obj)
    if isinstance(obj, OptimizationResult):
        return {"best_fidelity": obj.best_fidelity,
                "restart_fidelities": obj.restart_fidelities,
                "iterations": obj.iterations, "stop_reason": obj.stop_reason}
    raise TypeError(f"cannot serialize {type(obj)}")
