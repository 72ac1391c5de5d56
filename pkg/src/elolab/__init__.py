"""Elo rating robustness lab for pairwise model comparisons.

Replays fixed match outcomes under many orderings, sweeps the K-factor, and
checks whether the induced ranking respects known transitive orderings.
"""

from .engine import DEFAULT_CONFIG, RatingConfig, TiePolicy, equilibrium_gap, expected_score, update_pair
from .experiments import (
    SweepGrid,
    TransitivityReport,
    check_transitivity,
    k_sweep,
    nperms_curve,
    ranking_from_ratings,
    recommend_settings,
    transitivity_experiment,
    transitivity_from_sequence,
)
from .permutation import PermutationSummary, Trajectory, replay, run_permutations, sem
from .synth import (
    MatchRecord,
    Outcome,
    PairSpec,
    ScenarioSpec,
    bernoulli_outcomes,
    binomial_pmf,
    build_scenario_sequence,
    enumerate_pairs,
    multinomial_outcomes,
    multinomial_pmf,
    named_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CONFIG",
    "MatchRecord",
    "Outcome",
    "PairSpec",
    "PermutationSummary",
    "RatingConfig",
    "ScenarioSpec",
    "SweepGrid",
    "TiePolicy",
    "Trajectory",
    "TransitivityReport",
    "bernoulli_outcomes",
    "binomial_pmf",
    "build_scenario_sequence",
    "check_transitivity",
    "enumerate_pairs",
    "equilibrium_gap",
    "expected_score",
    "k_sweep",
    "multinomial_outcomes",
    "multinomial_pmf",
    "named_scenario",
    "nperms_curve",
    "ranking_from_ratings",
    "recommend_settings",
    "replay",
    "run_permutations",
    "sem",
    "transitivity_experiment",
    "transitivity_from_sequence",
    "update_pair",
]
