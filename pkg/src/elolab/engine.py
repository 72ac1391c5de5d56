"""Elo expected-score and rating-update rules.

    E_A  = 1 / (1 + base ** ((R_B - R_A) / scale))
    R'_A = R_A + K * (S_A - E_A)
    R'_B = R_B - K * (S_A - E_A)

The defaults (base 10, scale 400) make a 400 point gap equal to 10:1 odds.
Ratings are kept as full-precision floats; there is no clamping or rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np


class TiePolicy(str, Enum):
    """How tied matches are treated."""

    EXCLUDE = "exclude"
    HALF_SCORE = "half_score"


@dataclass(frozen=True)
class RatingConfig:
    initial_rating: float = 1400.0
    k_factor: float = 16.0
    scale_divisor: float = 400.0
    odds_base: float = 10.0
    tie_policy: TiePolicy = TiePolicy.EXCLUDE

    def __post_init__(self) -> None:
        object.__setattr__(self, "tie_policy", TiePolicy(self.tie_policy))
        if not math.isfinite(self.initial_rating):
            raise ValueError(f"initial_rating must be finite, got {self.initial_rating}")
        if not (math.isfinite(self.k_factor) and self.k_factor > 0):
            raise ValueError(f"k_factor must be a positive real, got {self.k_factor}")
        if not (math.isfinite(self.scale_divisor) and self.scale_divisor > 0):
            raise ValueError(f"scale_divisor must be positive, got {self.scale_divisor}")
        if not (math.isfinite(self.odds_base) and self.odds_base > 1):
            raise ValueError(f"odds_base must be > 1, got {self.odds_base}")

    def with_k(self, k_factor: float) -> RatingConfig:
        return replace(self, k_factor=k_factor)

    @property
    def log_base_per_point(self) -> float:
        # converts a rating gap into a logit
        return math.log(self.odds_base) / self.scale_divisor


DEFAULT_CONFIG = RatingConfig()

VALID_SCORES = (0.0, 0.5, 1.0)


def _require_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"rating must be finite, got {v!r}")


def check_score(s_a: float, config: RatingConfig) -> float:
    """Validate an actual score against the tie policy and return it as float."""
    s = float(s_a)
    if s not in VALID_SCORES:
        raise ValueError(f"score must be one of {VALID_SCORES}, got {s_a!r}")
    if s == 0.5 and config.tie_policy is not TiePolicy.HALF_SCORE:
        raise ValueError("a tie score of 0.5 requires tie_policy='half_score'")
    return s


def _logistic_of_gap(logit: float) -> float:
    try:
        return 1.0 / (1.0 + math.exp(logit))
    except OverflowError:
        return 0.0


def expected_score(r_a: float, r_b: float, config: RatingConfig = DEFAULT_CONFIG) -> float:
    """Probability that A beats B under the Elo model.

    >>> expected_score(1400, 1400)
    0.5
    """
    _require_finite(r_a, r_b)
    return _logistic_of_gap((r_b - r_a) * config.log_base_per_point)


def expected_score_array(r_a: np.ndarray, r_b: np.ndarray, config: RatingConfig) -> np.ndarray:
    """Vectorised :func:`expected_score` without input validation."""
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp((r_b - r_a) * config.log_base_per_point))


def update_pair(
    r_a: float, r_b: float, s_a: float, config: RatingConfig = DEFAULT_CONFIG
) -> tuple[float, float]:
    """Apply one Elo update for a match between A and B.

    Args:
        r_a: Rating of A before the match.
        r_b: Rating of B before the match.
        s_a: Actual score of A: 1 win, 0 loss, 0.5 tie (half_score policy only).
        config: Hyperparameters.

    Returns:
        The post-match ratings ``(R'_A, R'_B)``. B's update uses S_B = 1 - S_A
        and E_B = 1 - E_A, so the pair sum is conserved.
    """
    _require_finite(r_a, r_b)
    s = check_score(s_a, config)
    delta = config.k_factor * (s - _logistic_of_gap((r_b - r_a) * config.log_base_per_point))
    return r_a + delta, r_b - delta


def equilibrium_gap(p: float, config: RatingConfig = DEFAULT_CONFIG) -> float:
    """Rating gap at which the expected score equals the win probability ``p``."""
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie strictly between 0 and 1, got {p!r}")
    return math.log(p / (1.0 - p)) / config.log_base_per_point
