import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from darkpair.ideal import (
    ideal_excitations,
    ideal_variances,
    minimal_cutoff,
    state_coefficients,
)

# mpmath, 30 digits
C0_R1 = 0.64805427366388539957
C1_R1 = 0.49355434756457307527
SINH2_1 = 1.3810978455418157298
SINH2_3 = 100.35781806122794724


def test_vacuum_coefficients():
    s = state_coefficients(0.0)
    assert s.n_max == 0
    np.testing.assert_array_equal(state_coefficients(0.0, 5).coefficients, [1, 0, 0, 0, 0, 0])
    assert s.deficit == 0


def test_coefficients_r1():
    s = state_coefficients(1.0)
    assert s.coefficients[0] == pytest.approx(C0_R1, rel=1e-14)
    assert s.coefficients[1] == pytest.approx(C1_R1, rel=1e-14)


def test_cutoff_too_small_suggests_value():
    needed = minimal_cutoff(1.0)
    with pytest.raises(ValueError, match=f"n_max >= {needed}"):
        state_coefficients(1.0, 5)
    assert state_coefficients(1.0, needed).n_max == needed


def test_negative_r_rejected():
    with pytest.raises(ValueError):
        state_coefficients(-0.1)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 2.0, 3.0])
def test_auto_cutoff_meets_tail_tolerance(r):
    s = state_coefficients(r)
    assert s.deficit < 1e-12
    assert s.probabilities.sum() <= 1 + 1e-15
    assert s.probabilities.sum() == pytest.approx(1, abs=1e-10)
    assert math.tanh(r) ** (2 * (s.n_max - 1)) >= 1e-12


def test_large_r_log_space_matches_direct():
    r = 20.5
    s = state_coefficients(r, 50, check_tail=False)
    direct = math.tanh(r) ** np.arange(51) / math.cosh(r)
    np.testing.assert_allclose(s.coefficients, direct, rtol=1e-12)
    assert s.deficit == pytest.approx(1, abs=1e-12)
    big = state_coefficients(400.0, 50, check_tail=False).coefficients
    assert np.all(np.isfinite(big)) and big[0] > 0


def test_auto_cutoff_refuses_huge_r():
    with pytest.raises(ValueError, match="levels"):
        state_coefficients(20.5)


@pytest.mark.parametrize("r,expected", [(0.0, (0.5, 0.5)), (1.0, (0.067667641618306346, 3.6945280494653251))])
def test_ideal_variances(r, expected):
    assert ideal_variances(r) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("r,expected", [(0.0, 0.0), (1.0, SINH2_1), (3.0, SINH2_3)])
def test_ideal_excitations(r, expected):
    assert ideal_excitations(r) == pytest.approx(expected, rel=1e-14)


def test_array_inputs():
    r = np.linspace(0, 2, 5)
    y, x = ideal_variances(r)
    np.testing.assert_allclose(y * x, 0.25)
    assert ideal_excitations(r).shape == (5,)


@given(st.floats(0.01, 4))
def test_mean_pairs_match_excitations(r):
    s = state_coefficients(r)
    # the neglected tail carries at most ~n_max * deficit pairs
    assert s.mean_pairs() == pytest.approx(ideal_excitations(r), abs=10 * s.n_max * s.deficit + 1e-12)


@given(st.floats(1e-6, 20))
def test_duan_criterion(r):
    var_y_plus, _ = ideal_variances(r)
    var_x_minus = 0.5 * math.exp(-2 * r)
    assert var_y_plus + var_x_minus < 1
