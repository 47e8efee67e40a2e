from __future__ import annotations

import pytest

from thermoform.symbolic import Potential, SftSystem

M = [[1.0, 2.0], [3.0, 4.0]]


@pytest.fixture
def full2():
    return SftSystem.full_shift(2)


@pytest.fixture
def golden():
    return SftSystem.golden_mean()


@pytest.fixture
def markov_phi(full2):
    return Potential.log_matrix(full2, M)
