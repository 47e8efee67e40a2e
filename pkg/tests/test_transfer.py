from __future__ import annotations

import math

import numpy as np
import pytest

from thermoform.errors import InvalidParameter, InvalidSystem, NumericFailure
from thermoform.measures import CylinderMeasure, total_variation
from thermoform.symbolic import Potential, SftSystem, enumerate_words
from thermoform.transfer import (check_pressure_gap, coboundary_transform, conformal_by_iteration,
                                 conformal_measure, cover_sum_pressure, equilibrium_measure, perron,
                                 pressure, relative_pressure_subshift, transfer_matrix)

GOLDEN_P = math.log((1 + math.sqrt(5)) / 2)


def test_golden_mean_spectral(golden):
    sd = perron(transfer_matrix(golden, Potential.zero(golden)))
    assert sd.lam == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-12)
    assert sd.residual < 1e-12
    assert sd.pressure == pytest.approx(GOLDEN_P, abs=1e-12)


def test_pressure_matches_numpy_eigenvalues(full2):
    rng = np.random.default_rng(0)
    for _ in range(20):
        M = rng.uniform(0.1, 5, size=(2, 2))
        P = pressure(full2, Potential.log_matrix(full2, M))
        assert P == pytest.approx(math.log(max(abs(np.linalg.eigvals(M)))), abs=1e-11)


def test_constant_shift_and_full_shift_entropy():
    S = SftSystem.full_shift(3)
    assert pressure(S, Potential.constant(S, 0.7)) == pytest.approx(math.log(3) + 0.7, abs=1e-12)


def test_bernoulli_pressure_zero(full2):
    sd = perron(transfer_matrix(full2, Potential.log_probabilities(full2, [1 / 3, 2 / 3])))
    assert abs(sd.lam - 1) < 1e-12
    nu = conformal_measure(full2, Potential.log_probabilities(full2, [1 / 3, 2 / 3]), spectral=sd)
    assert nu.weight((0, 1, 1)) == pytest.approx(4 / 27, abs=1e-14)


def test_conformal_matches_dual_iteration(full2, markov_phi):
    nu = conformal_measure(full2, markov_phi)
    lam, eta = conformal_by_iteration(full2, markov_phi, 6)
    assert lam == pytest.approx(math.exp(pressure(full2, markov_phi)), rel=1e-12)
    for w, v in eta.items():
        assert nu.weight(w) == pytest.approx(v, abs=1e-12)


def test_equilibrium_is_invariant_probability(golden, markov_phi, full2):
    for S, phi in ((golden, Potential.zero(golden)), (full2, markov_phi)):
        mu = equilibrium_measure(S, phi)
        assert mu.total_mass() == pytest.approx(1.0, abs=1e-13)
        assert mu.additivity_defect(8) < 1e-13
        assert mu.is_shift_invariant(8)


def test_golden_mean_parry_measure(golden):
    mu = equilibrium_measure(golden, Potential.zero(golden))
    g = (1 + math.sqrt(5)) / 2
    assert mu.weight((1,)) == pytest.approx(1 / (g * g + 1), abs=1e-13)


def test_finite_n_bracket_contains_limit(golden, full2, markov_phi):
    for S, phi in ((golden, Potential.zero(golden)), (full2, markov_phi)):
        P = pressure(S, phi)
        for n in (6, 12, 18):
            est = pressure(S, phi, "finite_n", n=n, epsilon=0.5)
            assert est.contains(P, 1e-12)
            assert est.lower <= est.value <= est.upper


def test_finite_n_brackets_shrink(golden):
    phi = Potential.zero(golden)
    widths = [pressure(golden, phi, "finite_n", n=n).upper - pressure(golden, phi, "finite_n", n=n).lower
              for n in (4, 8, 16, 32)]
    assert all(b < a for a, b in zip(widths, widths[1:]))


def test_reducible_and_periodic_matrices():
    with pytest.raises(InvalidSystem):
        perron(np.array([[1.0, 1.0], [0.0, 1.0]]))
    sd = perron(np.array([[0.0, 2.0], [0.5, 0.0]]))
    assert sd.lam == pytest.approx(1.0, abs=1e-12)


def test_perron_reports_non_convergence():
    with pytest.raises(NumericFailure):
        perron(np.array([[1.0, 1.0], [1.0, 1.001]]), tol=1e-300, max_iter=3)


def test_relative_pressure_on_subshifts(full2):
    phi = Potential.symbol_values(full2, [0.0, 0.5])
    fixed0 = full2.restrict([[1, 0], [0, 0]])
    fixed1 = full2.restrict([[0, 0], [0, 1]])
    assert relative_pressure_subshift(full2, phi, fixed0) == pytest.approx(0.0, abs=1e-14)
    assert relative_pressure_subshift(full2, phi, fixed1) == pytest.approx(0.5, abs=1e-14)
    empty = full2.restrict([[0, 1], [0, 0]])
    assert relative_pressure_subshift(full2, phi, empty) == -math.inf


def test_cover_sum_pressure_tracks_spectral(golden):
    phi = Potential.zero(golden)
    sub = golden.restrict(golden.transitions)
    gamma = cover_sum_pressure(golden, phi, sub, 1.0, 14)
    assert abs(gamma - GOLDEN_P) < 0.1


def test_check_pressure_gap(full2):
    phi = Potential.symbol_values(full2, [0.0, 0.5])
    rep = check_pressure_gap(full2, phi, None, full2.restrict([[1, 0], [0, 0]]))
    assert rep.holds and rep.gap == pytest.approx(pressure(full2, phi), abs=1e-10)
    assert rep.lipschitz_margin == pytest.approx(rep.gap / 2)
    assert check_pressure_gap(full2, phi, None, None).gap == math.inf


def test_coboundary_transform_changes_nothing_observable(full2, markov_phi):
    u = Potential.table(full2, 2, [0.3, -1.0, 2.0, 0.1])
    psi = coboundary_transform(markov_phi, u)
    assert psi.depth == 3
    assert pressure(full2, psi) == pytest.approx(pressure(full2, markov_phi), abs=1e-12)
    assert total_variation(equilibrium_measure(full2, psi), equilibrium_measure(full2, markov_phi), 6) < 1e-12


def test_spectral_needs_table(full2):
    sampled = Potential(full2, "sampled", sampler=lambda w: 0.0, variation_bound=lambda n: 0.0, sup_norm=0.0)
    with pytest.raises(InvalidParameter):
        pressure(full2, sampled)
    est = pressure(full2, sampled, "finite_n", n=8, approx_depth=4)
    assert est.contains(math.log(2), 1e-12)


def test_bernoulli_measure_matches_equilibrium(full2):
    b = CylinderMeasure.bernoulli([1 / 3, 2 / 3])
    mu = equilibrium_measure(full2, Potential.log_probabilities(full2, [1 / 3, 2 / 3]))
    assert total_variation(b, mu, 8) < 1e-13
    with pytest.raises(InvalidParameter):
        CylinderMeasure.bernoulli([0.5, 0.6])
    assert sum(b.weight(w) for w in enumerate_words(full2, 4)) == pytest.approx(1.0)
