import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elolab.engine import (
    DEFAULT_CONFIG,
    RatingConfig,
    TiePolicy,
    equilibrium_gap,
    expected_score,
    expected_score_array,
    update_pair,
)

ratings = st.floats(min_value=-5000, max_value=5000, allow_nan=False)


def test_even_ratings_give_even_odds():
    assert expected_score(1400, 1400) == 0.5


def test_400_point_gap_is_ten_to_one():
    assert expected_score(1800, 1400) == pytest.approx(10 / 11, abs=1e-12)
    assert expected_score(1400, 1800) == pytest.approx(1 / 11, abs=1e-12)


@pytest.mark.parametrize(
    "r_a, r_b, s_a, k, expected",
    [
        (1400, 1400, 1, 16, (1408.0, 1392.0)),
        (1500, 1400, 0, 32, (1479.5179, 1420.4821)),
    ],
)
def test_update_pair_examples(r_a, r_b, s_a, k, expected):
    new_a, new_b = update_pair(r_a, r_b, s_a, RatingConfig(k_factor=k))
    assert new_a == pytest.approx(expected[0], abs=1e-3)
    assert new_b == pytest.approx(expected[1], abs=1e-3)


def test_update_pair_by_hand():
    # E_A = 1/(1 + 10^(-100/400)), independent of the engine's logit form
    e_a = 1 / (1 + 10 ** (-0.25))
    assert e_a == pytest.approx(0.6400649, abs=1e-7)
    new_a, new_b = update_pair(1500, 1400, 0, RatingConfig(k_factor=32))
    assert new_a == pytest.approx(1500 - 32 * e_a, abs=1e-9)
    assert new_b == pytest.approx(1400 + 32 * e_a, abs=1e-9)


def test_tie_at_equal_ratings_is_a_fixed_point():
    cfg = RatingConfig(k_factor=16, tie_policy="half_score")
    assert update_pair(1400, 1400, 0.5, cfg) == (1400.0, 1400.0)


def test_tie_rejected_under_exclude_policy():
    with pytest.raises(ValueError, match="half_score"):
        update_pair(1400, 1400, 0.5, RatingConfig())


@pytest.mark.parametrize("score", [-1, 0.25, 2, 0.7])
def test_invalid_scores_rejected(score):
    with pytest.raises(ValueError):
        update_pair(1400, 1400, score, RatingConfig(tie_policy=TiePolicy.HALF_SCORE))


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite_inputs_rejected(bad):
    with pytest.raises(ValueError):
        expected_score(bad, 1400)
    with pytest.raises(ValueError):
        update_pair(1400, bad, 1)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"k_factor": 0},
        {"k_factor": -4},
        {"scale_divisor": 0},
        {"odds_base": 1},
        {"odds_base": 0.5},
        {"initial_rating": math.inf},
        {"tie_policy": "sometimes"},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        RatingConfig(**kwargs)


@pytest.mark.parametrize(
    "p, gap",
    [(0.5, 0.0), (10 / 11, 400.0), (0.75, 190.8485)],
)
def test_equilibrium_gap_examples(p, gap):
    assert equilibrium_gap(p) == pytest.approx(gap, abs=1e-4)


def test_equilibrium_gap_matches_log10_oracle():
    assert equilibrium_gap(0.75) == pytest.approx(400 * math.log10(3), abs=1e-9)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_equilibrium_gap_domain(p):
    with pytest.raises(ValueError):
        equilibrium_gap(p)


def test_custom_scale_and_base():
    cfg = RatingConfig(scale_divisor=200, odds_base=2)
    # a 200 point gap is 2:1 odds
    assert expected_score(1600, 1400, cfg) == pytest.approx(2 / 3, abs=1e-12)
    assert equilibrium_gap(2 / 3, cfg) == pytest.approx(200, abs=1e-9)


@given(ratings, ratings)
def test_complementarity(r_a, r_b):
    assert abs(expected_score(r_a, r_b) + expected_score(r_b, r_a) - 1) < 1e-12


@given(ratings, ratings, st.floats(min_value=-2000, max_value=2000))
def test_translation_invariance(r_a, r_b, shift):
    assert expected_score(r_a + shift, r_b + shift) == pytest.approx(expected_score(r_a, r_b), abs=1e-12)


@given(st.floats(-1500, 1500), st.floats(0.5, 500), st.floats(-1000, 1000))
def test_monotone_in_own_rating(r_a, step, r_b):
    assert expected_score(r_a + step, r_b) > expected_score(r_a, r_b)


@given(st.floats(min_value=0.001, max_value=0.999), st.floats(-3000, 3000))
def test_equilibrium_gap_inverts_expected_score(p, r):
    assert expected_score(r + equilibrium_gap(p), r) == pytest.approx(p, abs=1e-12)


@given(ratings, ratings, st.sampled_from([0, 1]), st.floats(0.1, 128))
def test_update_conserves_pair_sum(r_a, r_b, s, k):
    new_a, new_b = update_pair(r_a, r_b, s, RatingConfig(k_factor=k))
    assert new_a + new_b == pytest.approx(r_a + r_b, abs=1e-9)


@given(st.floats(-2000, 2000), st.floats(-2000, 2000))
def test_update_moves_towards_outcome(r_a, r_b):
    assert update_pair(r_a, r_b, 1)[0] > r_a
    assert update_pair(r_a, r_b, 0)[0] < r_a


def test_conservation_over_long_sequence():
    rng = np.random.default_rng(5)
    r_a = r_b = 1400.0
    for s in rng.integers(0, 2, 10_000).tolist():
        r_a, r_b = update_pair(r_a, r_b, s, RatingConfig(k_factor=32))
    assert abs(r_a + r_b - 2800) < 1e-6


def test_array_form_agrees_with_scalar():
    rng = np.random.default_rng(0)
    a = rng.uniform(800, 2200, 500)
    b = rng.uniform(800, 2200, 500)
    scalar = np.array([expected_score(x, y) for x, y in zip(a, b)])
    np.testing.assert_allclose(expected_score_array(a, b, DEFAULT_CONFIG), scalar, rtol=0, atol=1e-15)


def test_extreme_gap_does_not_overflow():
    assert expected_score(0, 1e6) == 0.0
    assert expected_score(1e6, 0) == 1.0
