from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from thermoform.errors import InsufficientData, InvalidParameter, InvalidSystem
from thermoform.symbolic import (Potential, SftSystem, birkhoff_sum, cylinder_diameter,
                                 dynamical_ball_cylinder, enumerate_words, prefix_length_for_radius,
                                 shift_distance, word_array)


def test_golden_mean_counts_are_fibonacci(golden):
    fib = [2, 3, 5, 8, 13, 21, 34, 55]
    assert [golden.count_words(n) for n in range(1, 9)] == fib
    assert [len(list(enumerate_words(golden, n))) for n in range(1, 9)] == fib


def test_enumeration_matches_brute_force(golden):
    for n in range(1, 8):
        brute = [w for w in itertools.product(range(2), repeat=n) if golden.is_admissible(w)]
        assert list(enumerate_words(golden, n)) == brute
        arr = word_array(golden, n)
        assert [tuple(r) for r in arr.tolist()] == brute


def test_invalid_systems_rejected():
    with pytest.raises(InvalidSystem):
        SftSystem(np.array([[1, 0], [0, 0]]))
    with pytest.raises((InvalidSystem, InvalidParameter)):
        SftSystem(np.array([[1, 2], [1, 1]]))


def test_primitivity(golden, full2):
    assert golden.is_primitive and golden.primitivity_power == 2
    assert full2.primitivity_power == 1
    periodic = SftSystem(np.array([[0, 1], [1, 0]]))
    assert not periodic.is_primitive


def test_restrict_and_contains(full2):
    sub = full2.restrict([[1, 0], [0, 0]], name="fixed point")
    assert full2.contains(sub)
    assert sub.count_words(5) == 1


@pytest.mark.parametrize("eps,m", [(1.0, 1), (0.25, 2), (0.2, 2), (1 / 9, 3), (0.5, 1), (1e-4, 100)])
def test_prefix_length(eps, m):
    assert prefix_length_for_radius(eps) == m


def test_prefix_length_boundaries():
    for m in range(1, 300):
        eps = m ** -2.0
        assert prefix_length_for_radius(eps) == m
        assert cylinder_diameter(prefix_length_for_radius(eps)) < eps
    for bad in (0.0, -1.0, 1.5):
        with pytest.raises(InvalidParameter):
            prefix_length_for_radius(bad)


def test_dynamical_ball_is_cylinder():
    x = (0, 1, 1, 0, 1, 0, 0, 1)
    assert dynamical_ball_cylinder(x, 3, 0.25) == (0, 1, 1, 0, 1)
    with pytest.raises(InsufficientData):
        dynamical_ball_cylinder(x, 7, 0.25)
    # points in the cylinder stay eps-close for n steps
    y = x[:5] + (1, 1, 1)
    for j in range(4):
        assert shift_distance(x[j:], y[j:]) <= 0.25


def test_potential_tables(full2, golden):
    phi = Potential.log_matrix(full2, [[1, 2], [3, 4]])
    assert phi((1, 0, 1)) == pytest.approx(math.log(3))
    assert phi.variation(1) == pytest.approx(math.log(2))
    assert phi.variation(2) == 0.0
    with pytest.raises(InvalidParameter):
        Potential.table(golden, 2, [0.0, 1.0])
    psi = Potential.indicator(full2, 1)
    assert (phi + psi)((1, 1)) == pytest.approx(math.log(4) + 1)
    assert (2 * psi).values.tolist() == [0.0, 2.0]
    assert psi.compose_shift()((0, 1)) == 1.0


def test_birkhoff_sum(full2):
    psi = Potential.indicator(full2, 1)
    assert birkhoff_sum(psi, (1, 0, 1, 1), 4) == 3
    with pytest.raises(InsufficientData):
        birkhoff_sum(Potential.log_matrix(full2, [[1, 2], [3, 4]]), (1, 0), 2)
