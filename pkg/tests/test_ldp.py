from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import binom

from thermoform.errors import InvalidParameter, InvalidSystem, ResourceLimit
from thermoform.ldp import (bernoulli_rate_oracle, brute_force_deviation, deviation_prob_exact,
                            empirical_rate, gap_tail, geometric_gap_fraction, geometric_gap_traces,
                            glue_segments, graph_diameter, katok_entropy, log_deviation_prob,
                            measure_entropy, pressure_curve, rate_function)
from thermoform.measures import CylinderMeasure
from thermoform.symbolic import Potential, SftSystem
from thermoform.transfer import equilibrium_measure


@pytest.fixture(scope="module")
def binomial():
    S = SftSystem.full_shift(2)
    return S, Potential.zero(S), Potential.indicator(S, 1), CylinderMeasure.bernoulli([0.5, 0.5])


def test_rate_matches_closed_form_and_duality(binomial):
    S, phi, psi, _ = binomial
    curve = pressure_curve(S, phi, psi, np.linspace(-2, 4, 13))
    assert curve.convex
    for c in (0.55, 0.6, 0.75, 0.9, 0.99):
        closed = -(c * math.log(2 * c) + (1 - c) * math.log(2 * (1 - c)))
        r = rate_function(curve, c)
        assert r.value == pytest.approx(closed, abs=1e-9)
        assert r.t_star == pytest.approx(math.log(c / (1 - c)), abs=1e-5)
        assert bernoulli_rate_oracle([1, 1], [0, 1], c) == pytest.approx(closed, abs=1e-9)


def test_rate_boundary_cases(binomial):
    S, phi, psi, _ = binomial
    curve = pressure_curve(S, phi, psi, [0, 1, 2])
    assert rate_function(curve, 0.5).value == 0.0
    assert rate_function(curve, 0.2).value == 0.0
    edge = rate_function(curve, 1.0)
    assert edge.boundary and edge.value == pytest.approx(-math.log(2), abs=1e-12)
    beyond = rate_function(curve, 1.2)
    assert beyond.value == -math.inf and beyond.flag


def test_rate_for_markov_potential(markov_phi, full2):
    psi = Potential.indicator(full2, 1)
    curve = pressure_curve(full2, markov_phi, psi, np.linspace(0, 3, 7))
    mean = curve.derivative(0.0)
    assert rate_function(curve, mean + 0.05).value < 0
    values = [rate_function(curve, c).value for c in np.linspace(mean + 0.01, 0.99, 8)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_binomial_tail_exact(binomial):
    S, _, psi, mu = binomial
    assert deviation_prob_exact(S, mu, psi, 0.75, 8, exact=True) == Fraction(37, 256)
    assert deviation_prob_exact(S, mu, psi, 0.75, 8, inclusive=False, exact=True) == Fraction(9, 256)
    for n in (10, 50, 200):
        assert deviation_prob_exact(S, mu, psi, 0.75, n) == pytest.approx(binom.sf(math.ceil(0.75 * n) - 1, n, 0.5), rel=1e-10)


def test_dp_equals_brute_force_markov(full2, markov_phi):
    mu = equilibrium_measure(full2, markov_phi)
    psi = Potential.table(full2, 2, [0.0, 0.5, 0.25, 1.0])
    for n in range(1, 15, 3):
        assert (deviation_prob_exact(full2, mu, psi, 0.6, n, exact=True)
                == brute_force_deviation(full2, mu, psi, 0.6, n))


def test_irrational_observable_rejected(binomial):
    S, _, _, mu = binomial
    psi = Potential.symbol_values(S, [0.0, math.pi])
    with pytest.raises(InvalidParameter):
        deviation_prob_exact(S, mu, psi, 1.0, 5)


def test_resource_limit(binomial):
    S, _, psi, mu = binomial
    with pytest.raises(ResourceLimit):
        log_deviation_prob(S, mu, psi, 0.75, 2000, max_cells=100)


def test_empirical_rate(binomial):
    S, _, psi, mu = binomial
    ns = [200, 400, 600, 800, 1000]
    er = empirical_rate(ns, log_probabilities=[log_deviation_prob(S, mu, psi, 0.75, n) for n in ns])
    assert er.slope == pytest.approx(-0.1308123, abs=2e-3)
    assert not er.subexponential
    flat = empirical_rate(ns, log_probabilities=[log_deviation_prob(S, mu, psi, 0.5, n) for n in ns])
    assert flat.subexponential and abs(flat.slope) < 1e-3


def test_gap_tail_geometric_generator():
    q = 0.5
    traces = geometric_gap_traces(q, 20_000, 40, seed=1)
    gt = gap_tail(traces, 1.0, 2.0, np.arange(2, 16))
    assert gt.rate == pytest.approx(math.log(q), rel=0.1)
    oracle = [geometric_gap_fraction(q, int(n)) for n in gt.n_grid[:6]]
    assert gt.fractions[:6] == pytest.approx(oracle, abs=0.01)
    assert geometric_gap_fraction(q, 5) == pytest.approx(q ** 5 * (1 + 4 * (1 - q)))


def test_gap_tail_empty_on_shift():
    traces = [(np.arange(1, 201), 200)] * 3
    gt = gap_tail(traces, 1.0, 0.1, np.arange(5, 200, 5))
    assert gt.rate == -math.inf and gt.counts.sum() == 0


def test_gluing_golden_mean(golden):
    r = glue_segments(golden, [(1, 0, 1), (1,), (0, 1)])
    assert r.word == (1, 0, 1, 0, 1, 0, 1)
    assert r.connectors == [1, 0] and r.bound == 1
    assert golden.is_admissible(r.word)
    assert graph_diameter(golden) == 2


def test_gluing_errors(golden):
    with pytest.raises(InvalidParameter):
        glue_segments(golden, [(1, 1)])
    with pytest.raises(InvalidSystem):
        glue_segments(SftSystem(np.array([[0, 1], [1, 0]])), [(0,), (0,)])


def test_katok_bernoulli_weight_classes_agree_with_cylinders():
    b = CylinderMeasure.bernoulli([1 / 3, 2 / 3])
    direct = katok_entropy(b, 14, 1.0, 0.1)
    classes = katok_entropy(b, 14, 1.0, 0.1, max_words=10)
    assert direct.mode == "cylinders" and classes.mode == "weight-classes"
    assert direct.log_count == pytest.approx(classes.log_count, abs=1e-9)


def test_katok_markov_classes_agree_with_cylinders(full2, markov_phi):
    mu = equilibrium_measure(full2, markov_phi)
    for n in (5, 12, 17):
        a = katok_entropy(mu, n, 1.0, 0.2)
        b = katok_entropy(mu, n, 1.0, 0.2, max_words=10)
        assert a.log_count == pytest.approx(b.log_count, abs=1e-9)


def test_katok_converges_to_entropy():
    b = CylinderMeasure.bernoulli([1 / 3, 2 / 3])
    h = measure_entropy(b)
    assert h == pytest.approx(0.6365141682948128, abs=1e-12)
    assert abs(katok_entropy(b, 2000, 1.0, 0.1).value - h) < 0.02
