"""Synthetic pairwise feedback.

Each match between two models is an i.i.d. categorical draw over
``{a_wins, tie, b_wins}``; with no tie mass this is a Bernoulli trial. The
exact binomial and multinomial pmfs live here too so samplers can be checked
against them.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .seeding import derive_seed, make_rng

LOG_SPACE_THRESHOLD = 100


class Outcome(str, Enum):
    A_WINS = "a_wins"
    B_WINS = "b_wins"
    TIE = "tie"


_SCORE_A = {Outcome.A_WINS: 1.0, Outcome.B_WINS: 0.0, Outcome.TIE: 0.5}


@dataclass(frozen=True, slots=True)
class MatchRecord:
    """One pairwise outcome between two identified models."""

    model_a: str
    model_b: str
    outcome: Outcome
    sequence_index: int = 0

    def __post_init__(self) -> None:
        if self.model_a == self.model_b:
            raise ValueError(f"a model cannot play itself: {self.model_a!r}")
        if not isinstance(self.outcome, Outcome):
            object.__setattr__(self, "outcome", Outcome(self.outcome))
        if self.sequence_index < 0:
            raise ValueError("sequence_index must be non-negative")

    @property
    def score_a(self) -> float:
        return _SCORE_A[self.outcome]


@dataclass(frozen=True)
class PairSpec:
    model_a: str
    model_b: str
    p_a_wins: float
    p_tie: float = 0.0
    n_games: int = 1000

    def __post_init__(self) -> None:
        if self.model_a == self.model_b:
            raise ValueError(f"a model cannot play itself: {self.model_a!r}")
        if not 0.0 <= self.p_a_wins <= 1.0:
            raise ValueError(f"p_a_wins must be in [0, 1], got {self.p_a_wins}")
        if not 0.0 <= self.p_tie <= 1.0:
            raise ValueError(f"p_tie must be in [0, 1], got {self.p_tie}")
        if self.p_a_wins + self.p_tie > 1.0 + 1e-12:
            raise ValueError("p_a_wins + p_tie must not exceed 1")
        if int(self.n_games) != self.n_games or self.n_games < 1:
            raise ValueError(f"n_games must be a positive integer, got {self.n_games}")


SCENARIO_PROBABILITIES: dict[str, tuple[float, float]] = {
    # (P(A beats B), P(B beats C))
    "king": (0.75, 0.75),
    "rook": (0.75, 0.51),
    "bishop": (0.51, 0.75),
    "knight": (0.54, 0.51),
}

SCENARIO_LABELS = {
    "king": "A >> B, B >> C",
    "rook": "A >> B, B ~ C",
    "bishop": "A ~ B, B >> C",
    "knight": "A ~ B, B ~ C",
}


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    pair_specs: tuple[PairSpec, ...]
    interleave_seed: int = 0
    expected_order: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.name not in (*SCENARIO_PROBABILITIES, "custom"):
            raise ValueError(f"unknown scenario {self.name!r}")
        object.__setattr__(self, "pair_specs", tuple(self.pair_specs))
        if not self.pair_specs:
            raise ValueError("a scenario needs at least one pair")
        if self.name != "custom":
            probs = tuple(ps.p_a_wins for ps in self.pair_specs)
            if len(self.pair_specs) != 2 or probs != SCENARIO_PROBABILITIES[self.name]:
                raise ValueError(f"scenario {self.name!r} must be A-B, B-C with p={SCENARIO_PROBABILITIES[self.name]}")
        object.__setattr__(self, "expected_order", tuple(self.expected_order))

    @property
    def models(self) -> list[str]:
        seen: dict[str, None] = {}
        for ps in self.pair_specs:
            seen.setdefault(ps.model_a)
            seen.setdefault(ps.model_b)
        return list(seen)


def named_scenario(name: str, n_games: int = 1000, interleave_seed: int = 0) -> ScenarioSpec:
    """Build one of the four three-model transitivity scenarios.

    Models are ``A``, ``B``, ``C``; only the A-B and B-C pairings are played and
    the expected order is A > B > C.
    """
    try:
        p_ab, p_bc = SCENARIO_PROBABILITIES[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIO_PROBABILITIES)}") from None
    return ScenarioSpec(
        name=name,
        pair_specs=(PairSpec("A", "B", p_ab, n_games=n_games), PairSpec("B", "C", p_bc, n_games=n_games)),
        interleave_seed=interleave_seed,
        expected_order=("A", "B", "C"),
    )


CODE_OUTCOMES = (Outcome.A_WINS, Outcome.B_WINS, Outcome.TIE)


def outcome_codes(pair: PairSpec, seed: int) -> np.ndarray:
    """Raw draws as codes 0 (A wins), 1 (B wins), 2 (tie).

    One uniform per game: below ``p_a_wins`` is an A win, the next ``p_tie``
    of mass is a tie, the rest a B win.
    """
    u = make_rng(seed, "outcomes").random(pair.n_games)
    return np.where(u < pair.p_a_wins, 0, np.where(u < pair.p_a_wins + pair.p_tie, 2, 1))


def _draw(pair: PairSpec, seed: int) -> list[MatchRecord]:
    codes = outcome_codes(pair, seed)
    return [
        MatchRecord(pair.model_a, pair.model_b, CODE_OUTCOMES[c], i) for i, c in enumerate(codes.tolist())
    ]


def bernoulli_outcomes(pair: PairSpec, seed: int) -> list[MatchRecord]:
    """Draw ``pair.n_games`` win/loss outcomes, A winning with ``p_a_wins``."""
    if pair.p_tie != 0:
        raise ValueError("bernoulli_outcomes needs p_tie == 0; use multinomial_outcomes for ties")
    return _draw(pair, seed)


def multinomial_outcomes(pair: PairSpec, seed: int) -> list[MatchRecord]:
    """Draw win/tie/loss outcomes with probabilities (p_a_wins, p_tie, rest).

    Uses the same uniform stream as :func:`bernoulli_outcomes`, so with
    ``p_tie == 0`` both return identical sequences for a given seed.
    """
    return _draw(pair, seed)


def binomial_pmf(k: int, n: int, p: float) -> float:
    """P(k successes in n trials), computed in log space once n > 100."""
    if not (0 <= k <= n):
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if n <= LOG_SPACE_THRESHOLD:
        return math.comb(n, k) * p**k * (1.0 - p) ** (n - k)
    if p == 0.0:
        return 1.0 if k == 0 else 0.0
    if p == 1.0:
        return 1.0 if k == n else 0.0
    log_coef = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    return math.exp(log_coef + k * math.log(p) + (n - k) * math.log1p(-p))


def multinomial_pmf(
    n_win: int, n_loss: int, n_tie: int, p_win: float, p_loss: float, p_tie: float
) -> float:
    """Probability of observing the given win/loss/tie counts."""
    counts = (n_win, n_loss, n_tie)
    probs = (p_win, p_loss, p_tie)
    if any(c < 0 or int(c) != c for c in counts):
        raise ValueError(f"counts must be non-negative integers, got {counts}")
    if any(not 0.0 <= q <= 1.0 for q in probs) or abs(sum(probs) - 1.0) > 1e-12:
        raise ValueError(f"probabilities must lie in [0, 1] and sum to 1, got {probs}")
    total = sum(counts)
    if total <= LOG_SPACE_THRESHOLD:
        coef = math.factorial(total)
        for c in counts:
            coef //= math.factorial(c)
        value = float(coef)
        for c, q in zip(counts, probs):
            value *= q**c
        return value
    if any(q == 0.0 and c > 0 for c, q in zip(counts, probs)):
        return 0.0
    log_value = math.lgamma(total + 1)
    for c, q in zip(counts, probs):
        log_value -= math.lgamma(c + 1)
        if c:
            log_value += c * math.log(q)
    return math.exp(log_value)


def enumerate_pairs(models: Iterable[str]) -> list[tuple[str, str]]:
    """All unordered pairs of distinct models, n(n-1)/2 of them.

    Sets are sorted first so the result is deterministic; other iterables keep
    their order.
    """
    ids = sorted(models) if isinstance(models, (set, frozenset)) else list(models)
    if len(set(ids)) != len(ids):
        raise ValueError("model identifiers must be distinct")
    if len(ids) < 2:
        raise ValueError("need at least two models to form a pair")
    return list(itertools.combinations(ids, 2))


def interleave(groups: Iterable[Sequence[MatchRecord]], seed: int) -> list[MatchRecord]:
    """Concatenate match groups and apply one seeded uniform shuffle.

    ``sequence_index`` is rewritten to the position in the shuffled sequence.
    """
    pooled = [rec for group in groups for rec in group]
    order = make_rng(seed, "interleave").permutation(len(pooled))
    return [
        MatchRecord(pooled[j].model_a, pooled[j].model_b, pooled[j].outcome, pos)
        for pos, j in enumerate(order.tolist())
    ]


def build_scenario_sequence(spec: ScenarioSpec, outcome_seed: int) -> list[MatchRecord]:
    """Sample every pairing of ``spec`` and interleave them with one seeded shuffle."""
    groups = [
        multinomial_outcomes(pair, derive_seed(outcome_seed, "scenario-pair", i))
        for i, pair in enumerate(spec.pair_specs)
    ]
    return interleave(groups, spec.interleave_seed)


def outcome_counts(records: Sequence[MatchRecord]) -> dict[Outcome, int]:
    counts = {o: 0 for o in Outcome}
    for r in records:
        counts[r.outcome] += 1
    return counts
