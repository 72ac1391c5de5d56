"""Named experiments: K-factor sweeps, transitivity scenarios, and settings advice."""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .engine import DEFAULT_CONFIG, RatingConfig
from .permutation import encode_sequence, run_permutations, sem
from .seeding import derive_seed
from .synth import MatchRecord, Outcome, PairSpec, ScenarioSpec, build_scenario_sequence, multinomial_outcomes

DEFAULT_K_VALUES: tuple[float, ...] = (1, 8, 16, 32, 64)
DEFAULT_N_PERMS_VALUES: tuple[int, ...] = (1, 100)
# (n_perms, k) columns of the transitivity table
DEFAULT_TRANSITIVITY_CONFIGS: tuple[tuple[int, float], ...] = ((1, 1), (100, 1), (1, 16), (100, 16))


@dataclass(frozen=True)
class SweepGrid:
    """Final mean rating difference (A minus B) over a p x K x n_perms grid.

    ``cells[i, j, l]`` belongs to ``p_values[i]``, ``k_values[j]`` and
    ``n_perms_values[l]``. ``positive_fraction`` holds, per cell, the share of
    individual orderings whose own final difference is positive. For an
    ingested sequence ``p_values`` has one entry: the observed win rate of
    ``model_a`` over non-tie games.
    """

    model_a: str
    model_b: str
    p_values: tuple[float, ...]
    k_values: tuple[float, ...]
    n_perms_values: tuple[int, ...]
    cells: np.ndarray
    positive_fraction: np.ndarray
    wins_a: tuple[float, ...]
    master_seed: int
    source: str = "synthetic"

    def cell(self, k: float, n_perms: int, p: float | None = None) -> float:
        i = 0 if p is None else self.p_values.index(p)
        return float(self.cells[i, self.k_values.index(k), self.n_perms_values.index(n_perms)])


def _observed_rate(sequence: Sequence[MatchRecord], model_a: str, model_b: str) -> tuple[float, float]:
    wins = losses = 0
    for r in sequence:
        if {r.model_a, r.model_b} != {model_a, model_b} or r.outcome is Outcome.TIE:
            continue
        a_won = (r.outcome is Outcome.A_WINS) == (r.model_a == model_a)
        wins += a_won
        losses += not a_won
    rate = wins / (wins + losses) if wins + losses else math.nan
    return rate, float(wins)


def k_sweep(
    source: PairSpec | Sequence[MatchRecord],
    *,
    k_values: Iterable[float] = DEFAULT_K_VALUES,
    n_perms_values: Iterable[int] = DEFAULT_N_PERMS_VALUES,
    p_values: Iterable[float] | None = None,
    master_seed: int = 0,
    config: RatingConfig = DEFAULT_CONFIG,
    models: tuple[str, str] | None = None,
    workers: int = 1,
) -> SweepGrid:
    """Sweep K and n_perms for one synthetic pair or one ingested sequence.

    A synthetic source draws a single uniform stream per ``master_seed`` and
    thresholds it at each p, so one outcome sequence per (p, master_seed) is
    shared by every (K, n_perms) cell. Orderings are also shared across cells
    since every cell uses the same ``master_seed``.
    """
    ks = tuple(sorted(set(k_values)))
    ns = tuple(sorted(set(n_perms_values)))
    if not ks or not ns:
        raise ValueError("k_values and n_perms_values must be non-empty")
    if any(k <= 0 for k in ks) or any(n < 1 for n in ns):
        raise ValueError("k_values must be positive and n_perms_values >= 1")

    if isinstance(source, PairSpec):
        ps = tuple(p_values) if p_values is not None else (source.p_a_wins,)
        if not ps:
            raise ValueError("p_values must be non-empty")
        outcome_seed = derive_seed(master_seed, "sweep-outcomes")
        sequences = [multinomial_outcomes(replace(source, p_a_wins=p), outcome_seed) for p in ps]
        model_a, model_b = source.model_a, source.model_b
        kind = "synthetic"
    else:
        if p_values is not None:
            raise ValueError("p_values only applies to a synthetic PairSpec source")
        if not source:
            raise ValueError("cannot sweep an empty sequence")
        model_a, model_b = models or (source[0].model_a, source[0].model_b)
        rate, _ = _observed_rate(source, model_a, model_b)
        ps = (rate,)
        sequences = [list(source)]
        kind = "ingested"

    cells = np.empty((len(ps), len(ks), len(ns)))
    positive = np.empty_like(cells)
    wins_a = []
    for i, seq in enumerate(sequences):
        enc = encode_sequence(seq, config)
        wins_a.append(enc.win_counts()[model_a])
        for j, k in enumerate(ks):
            for l, n in enumerate(ns):
                summary = run_permutations(enc, n, master_seed, config.with_k(k), workers=workers)
                cells[i, j, l] = summary.final_difference(model_a, model_b)
                positive[i, j, l] = np.mean(summary.per_perm_difference(model_a, model_b) > 0)
    return SweepGrid(model_a, model_b, ps, ks, ns, cells, positive, tuple(wins_a), master_seed, kind)


class Violation(NamedTuple):
    n_perms: int
    k_factor: float
    expected_higher: str
    expected_lower: str


@dataclass(frozen=True)
class ConfigResult:
    n_perms: int
    k_factor: float
    mean: dict[str, float]
    sem: dict[str, float]
    ranking: tuple[str, ...]
    violated: bool


@dataclass(frozen=True)
class TransitivityReport:
    scenario: str
    expected_ranking: tuple[str, ...]
    results: tuple[ConfigResult, ...]
    master_seed: int

    @property
    def models(self) -> tuple[str, ...]:
        return tuple(sorted(self.results[0].mean)) if self.results else ()

    def result(self, n_perms: int, k_factor: float) -> ConfigResult:
        for res in self.results:
            if res.n_perms == n_perms and res.k_factor == k_factor:
                return res
        raise KeyError((n_perms, k_factor))


def ranking_from_ratings(ratings: Mapping[str, float]) -> list[str]:
    """Model ids by descending rating; exact ties go to the lexicographically smaller id."""
    if not ratings:
        raise ValueError("cannot rank an empty rating map")
    if not all(math.isfinite(v) for v in ratings.values()):
        raise ValueError("ratings must be finite")
    return sorted(ratings, key=lambda m: (-ratings[m], m))


def _pair_violations(ranking: Sequence[str], expected: Sequence[str]) -> list[tuple[str, str]]:
    place = {m: i for i, m in enumerate(ranking)}
    return [
        (hi, lo)
        for i, hi in enumerate(expected)
        for lo in expected[i + 1 :]
        if place[hi] > place[lo]
    ]


def transitivity_from_sequence(
    name: str,
    sequence: Sequence[MatchRecord],
    expected: Sequence[str],
    configs: Iterable[tuple[int, float]] = DEFAULT_TRANSITIVITY_CONFIGS,
    master_seed: int = 0,
    config: RatingConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> TransitivityReport:
    """Run every (n_perms, K) configuration on one baseline sequence and rank the models."""
    enc = encode_sequence(sequence, config)
    expected = tuple(expected)
    if sorted(expected) != sorted(enc.model_ids):
        raise ValueError(f"expected ranking {expected} does not cover models {enc.model_ids}")
    results = []
    for n_perms, k in configs:
        summary = run_permutations(enc, n_perms, master_seed, config.with_k(k), workers=workers)
        ranking = tuple(ranking_from_ratings(summary.final_mean))
        results.append(
            ConfigResult(
                n_perms=n_perms,
                k_factor=k,
                mean=summary.final_mean,
                sem=summary.final_sem,
                ranking=ranking,
                violated=ranking != expected,
            )
        )
    return TransitivityReport(name, expected, tuple(results), master_seed)


def transitivity_experiment(
    scenario: ScenarioSpec,
    configs: Iterable[tuple[int, float]] = DEFAULT_TRANSITIVITY_CONFIGS,
    master_seed: int = 0,
    config: RatingConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> TransitivityReport:
    """Sample the scenario's baseline sequence from ``master_seed`` and test every configuration."""
    expected = scenario.expected_order or tuple(scenario.models)
    sequence = build_scenario_sequence(scenario, derive_seed(master_seed, "scenario-outcomes"))
    return transitivity_from_sequence(scenario.name, sequence, expected, configs, master_seed, config, workers)


def check_transitivity(report: TransitivityReport, expected: Sequence[str]) -> list[Violation]:
    """List every model pair, per configuration, ranked against the expected order."""
    expected = tuple(expected)
    violations = []
    for res in report.results:
        if sorted(res.ranking) != sorted(expected):
            raise ValueError(f"expected order {expected} does not match report models {res.ranking}")
        violations.extend(
            Violation(res.n_perms, res.k_factor, hi, lo) for hi, lo in _pair_violations(res.ranking, expected)
        )
    return violations


class Recommendation(NamedTuple):
    k_factor: float
    n_perms: int
    rationale: str


def recommend_settings(estimated_win_rate: float) -> Recommendation:
    """Suggest K and the number of orderings for a pair with the given win rate.

    Orderings are always at least 100. Close matches (within 0.05 of even) get
    a small K to damp fluctuations; clear gaps (0.1 or more) get a large K so
    ratings reach their level quickly; the band between uses K = 16.
    """
    if not 0.0 < estimated_win_rate < 1.0:
        raise ValueError(f"win rate must lie strictly between 0 and 1, got {estimated_win_rate}")
    margin = abs(estimated_win_rate - 0.5)
    permutations = "Average over at least 100 shuffled orderings; single orderings are unstable."
    if margin < 0.05:
        return Recommendation(
            8, 100, f"{permutations} Closely matched models: a small K limits rating swings."
        )
    if margin < 0.1:
        return Recommendation(16, 100, f"{permutations} Moderate gap: K = 16 balances speed and noise.")
    return Recommendation(
        32, 100, f"{permutations} Clear performance gap: a larger K lets ratings settle faster."
    )


class CurvePoint(NamedTuple):
    n_perms: int
    mean: float
    sem: float


def nperms_curve(
    sequence: Sequence[MatchRecord],
    model: str,
    n_perms_values: Iterable[int],
    master_seed: int = 0,
    config: RatingConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> list[CurvePoint]:
    """Mean final rating of ``model`` (with SEM) as the number of orderings grows.

    One run at the largest n is enough: the first n orderings of that run are
    exactly the orderings of an n-permutation run.
    """
    ns = sorted(set(n_perms_values))
    if not ns or ns[0] < 1:
        raise ValueError("n_perms_values must be non-empty positive integers")
    summary = run_permutations(sequence, ns[-1], master_seed, config, workers=workers)
    finals = summary.final_ratings_per_perm[:, summary.model_ids.index(model)]
    return [CurvePoint(n, float(finals[:n].mean()), sem(finals[:n])) for n in ns]
