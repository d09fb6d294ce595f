import csv
import json

import numpy as np
import pytest

from opengrape.experiments import (compare_open_vs_time_optimal, cross_evaluate,
                                   derive_seed, top_curve, write_manifest,
                                   write_scatter_csv, write_top_curve_csv)
from opengrape.grape import OptimizerConfig, optimize
from opengrape.linalg import expm
from opengrape.pauli import pauli_operator, vec
from opengrape.relaxation import RelaxationModel
from opengrape.systems import ControlSystem

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def one_qubit(relaxation=None, drift=False):
    d = pauli_operator("z") if drift else np.zeros((2, 2), dtype=complex)
    return ControlSystem(1, d, [pauli_operator("x"), pauli_operator("y")],
                         relaxation=relaxation)


def uniform_decay_model(gamma=0.5, n=1):
    # gamma * (1 - projector onto the identity direction): uniform decay of
    # every traceless mode, commuting with all Hamiltonian superoperators
    N = 2 ** n
    one = vec(np.eye(N)) / np.sqrt(N)
    G = gamma * (np.eye(N * N, dtype=complex) - np.outer(one, one.conj()))
    return RelaxationModel(terms=[], gamma=G, name="uniform")


TARGET = expm(-1j * np.pi / 2 * SX)
CFG = OptimizerConfig(dt=0.05, max_iterations=60, restarts=1, seed=11, u0=3.0)


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(5, 0, 1) == derive_seed(5, 0, 1)
    seeds = {derive_seed(5, k, i) for k in range(3) for i in range(4)}
    assert len(seeds) == 12


def test_top_curve_single_member_reduces_to_optimize():
    sys1 = one_qubit()
    curve = top_curve(sys1, TARGET, [0.5], CFG, family_size=1)
    entry = curve.entries[0]
    res = optimize(sys1, TARGET, 0.5,
                   OptimizerConfig(**{**vars(CFG), "seed": derive_seed(CFG.seed, 0, 0)}))
    assert entry.fidelities[0] == res.best_fidelity
    assert entry.rmsd == 0.0


def test_top_curve_sorted_and_improving():
    sys1 = one_qubit()
    curve = top_curve(sys1, TARGET, [0.5, 0.1], CFG, family_size=2)
    Ts = [e.T for e in curve.entries]
    assert Ts == sorted(Ts)
    # at T = 0.5 s a pi rotation with u0 = 3 Hz is easily reachable
    assert curve.entries[1].max >= 0.999


def test_top_curve_validates_grid():
    with pytest.raises(ValueError):
        top_curve(one_qubit(), TARGET, [], CFG)


def test_cross_evaluate_zero_gamma_matches_closed():
    sys1 = one_qubit()
    curve = top_curve(sys1, TARGET, [0.4], CFG, family_size=3)
    entry = curve.entries[0]
    open_sys = one_qubit(relaxation=uniform_decay_model(gamma=0.0))
    cross = cross_evaluate(entry, open_sys, TARGET)
    assert np.allclose(cross["open_fidelities"], entry.fidelities, atol=1e-9)


def test_cross_evaluate_uniform_decay_scales_family():
    # commuting uniform decay multiplies every traceless-mode weight by the
    # same factor, so the spread shrinks by that factor exactly
    sys1 = one_qubit()
    curve = top_curve(sys1, TARGET, [0.4], CFG, family_size=4)
    entry = curve.entries[0]
    g, T = 0.8, 0.4
    open_sys = one_qubit(relaxation=uniform_decay_model(gamma=g))
    cross = cross_evaluate(entry, open_sys, TARGET)
    scale = np.exp(-g * T)
    N2 = 4.0
    for fc, fo in zip(entry.fidelities, cross["open_fidelities"]):
        # f_open = (1 + scale * (N^2 f_closed - 1)) / N^2 for conjugations
        expected = (1 + scale * (N2 * fc - 1)) / N2
        assert fo == pytest.approx(expected, abs=1e-9)
    assert cross["rmsd"] == pytest.approx(scale * entry.rmsd, abs=1e-9)


def test_cross_evaluate_requires_relaxation():
    sys1 = one_qubit()
    curve = top_curve(sys1, TARGET, [0.4], CFG, family_size=1)
    with pytest.raises(ValueError):
        cross_evaluate(curve.entries[0], sys1, TARGET)


def test_compare_reports_z_score():
    open_sys = one_qubit(relaxation=uniform_decay_model(gamma=0.3))
    report = compare_open_vs_time_optimal(open_sys, TARGET, 0.4, CFG,
                                          family_size=3)
    assert report["z_score"] is None or np.isfinite(report["z_score"])
    assert 0 <= report["open_grape"].best_fidelity <= 1


def test_compare_degenerate_family_z_is_none():
    # family of one has zero rmsd
    open_sys = one_qubit(relaxation=uniform_decay_model(gamma=0.0))
    report = compare_open_vs_time_optimal(open_sys, TARGET, 0.4, CFG,
                                          family_size=1)
    assert report["z_score"] is None


def test_csv_and_manifest_round_trip(tmp_path):
    sys1 = one_qubit()
    curve = top_curve(sys1, TARGET, [0.3, 0.5], CFG, family_size=2)
    csv_path = tmp_path / "curve.csv"
    write_top_curve_csv(curve, csv_path)
    with open(csv_path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert float(rows[0]["T_seconds"]) == 0.3

    open_sys = one_qubit(relaxation=uniform_decay_model(gamma=0.5))
    cross = cross_evaluate(curve.entries[0], open_sys, TARGET)
    scatter_path = tmp_path / "scatter.csv"
    write_scatter_csv(cross, scatter_path)
    with open(scatter_path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2

    man_path = tmp_path / "run.json"
    write_manifest(man_path, config={"T": 0.3}, seeds={"master": 11},
                   extra={"result": np.float64(0.5)})
    data = json.loads(man_path.read_text())
    assert data["config"]["T"] == 0.3
    assert data["version"]
    assert data["result"] == 0.5
