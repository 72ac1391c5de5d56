"""Replay one fixed outcome multiset under many orderings.

Permutation 0 is always the sequence as given; permutation ``i > 0`` is a
uniform shuffle drawn from the child seed ``(master_seed, "permutation", i)``.
Because every ordering is keyed independently, the first ``n`` permutations of
a larger run are exactly the permutations of an ``n``-permutation run.

Orderings are replayed in fixed-size chunks, vectorised across the chunk. Per
match statistics are merged chunk by chunk in index order, so the result does
not depend on how many worker processes computed the chunks.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .engine import DEFAULT_CONFIG, RatingConfig, TiePolicy, update_pair
from .seeding import make_rng
from .synth import MatchRecord, Outcome

CHUNK_SIZE = 128


@dataclass(frozen=True)
class EncodedSequence:
    """Index-encoded matches, ties already removed when the policy excludes them."""

    model_ids: tuple[str, ...]
    a_idx: np.ndarray
    b_idx: np.ndarray
    scores: np.ndarray
    ties_dropped: int

    def __len__(self) -> int:
        return len(self.scores)

    def win_counts(self) -> dict[str, float]:
        """Total score per model; identical for every ordering of the sequence."""
        totals = np.zeros(len(self.model_ids))
        np.add.at(totals, self.a_idx, self.scores)
        np.add.at(totals, self.b_idx, 1.0 - self.scores)
        return dict(zip(self.model_ids, totals.tolist()))


def encode_sequence(
    sequence: Sequence[MatchRecord], config: RatingConfig = DEFAULT_CONFIG, strict: bool = False
) -> EncodedSequence:
    """Map records to index arrays. Models are ordered by identifier.

    Ties are dropped under the ``exclude`` policy, or rejected when ``strict``.
    """
    if len({r.sequence_index for r in sequence}) != len(sequence):
        raise ValueError("sequence_index values must be unique within a sequence")
    kept = []
    ties = 0
    for rec in sequence:
        if rec.outcome is Outcome.TIE and config.tie_policy is TiePolicy.EXCLUDE:
            if strict:
                raise ValueError(f"tie at sequence_index {rec.sequence_index} under tie_policy='exclude'")
            ties += 1
            continue
        kept.append(rec)
    if not kept:
        raise ValueError("sequence has no usable matches")
    model_ids = tuple(sorted({m for r in kept for m in (r.model_a, r.model_b)}))
    pos = {m: i for i, m in enumerate(model_ids)}
    return EncodedSequence(
        model_ids=model_ids,
        a_idx=np.array([pos[r.model_a] for r in kept], dtype=np.intp),
        b_idx=np.array([pos[r.model_b] for r in kept], dtype=np.intp),
        scores=np.array([r.score_a for r in kept], dtype=np.float64),
        ties_dropped=ties,
    )


@dataclass(frozen=True)
class Trajectory:
    """Ratings of every model after each processed match (one row per match)."""

    model_ids: tuple[str, ...]
    ratings: np.ndarray
    ties_skipped: int = 0

    def final(self) -> dict[str, float]:
        return dict(zip(self.model_ids, self.ratings[-1].tolist()))


@dataclass(frozen=True)
class PermutationSummary:
    model_ids: tuple[str, ...]
    mean_ratings: np.ndarray
    sem_ratings: np.ndarray
    final_ratings_per_perm: np.ndarray
    n_perms: int
    ties_dropped: int = 0
    trajectories: np.ndarray | None = None

    @property
    def final_mean(self) -> dict[str, float]:
        return dict(zip(self.model_ids, self.mean_ratings[-1].tolist()))

    @property
    def final_sem(self) -> dict[str, float]:
        return dict(zip(self.model_ids, self.sem_ratings[-1].tolist()))

    def final_difference(self, model_a: str, model_b: str) -> float:
        """Mean final rating of ``model_a`` minus that of ``model_b``."""
        means = self.final_mean
        return means[model_a] - means[model_b]

    def per_perm_difference(self, model_a: str, model_b: str) -> np.ndarray:
        i, j = self.model_ids.index(model_a), self.model_ids.index(model_b)
        return self.final_ratings_per_perm[:, i] - self.final_ratings_per_perm[:, j]


def replay(
    sequence: Sequence[MatchRecord], config: RatingConfig = DEFAULT_CONFIG, strict: bool = False
) -> Trajectory:
    """Replay matches in the given order, starting every model at the initial rating.

    Under the ``exclude`` tie policy tied matches are skipped and counted (or
    rejected when ``strict``); they produce no trajectory row.
    """
    if not sequence:
        raise ValueError("cannot replay an empty sequence")
    enc = encode_sequence(sequence, config, strict=strict)
    current = [config.initial_rating] * len(enc.model_ids)
    rows = np.empty((len(enc), len(enc.model_ids)))
    for t, (a, b, s) in enumerate(zip(enc.a_idx.tolist(), enc.b_idx.tolist(), enc.scores.tolist())):
        current[a], current[b] = update_pair(current[a], current[b], s, config)
        rows[t] = current
    return Trajectory(enc.model_ids, rows, enc.ties_dropped)


def permutation_order(n_matches: int, master_seed: int, perm_index: int) -> np.ndarray:
    if perm_index == 0:
        return np.arange(n_matches)
    return make_rng(master_seed, "permutation", perm_index).permutation(n_matches)


def replay_orders(enc: EncodedSequence, orders: np.ndarray, config: RatingConfig) -> np.ndarray:
    """Replay several orderings at once.

    Args:
        enc: Encoded match sequence of length T over M models.
        orders: Integer array (C, T); row c is the match order of replay c.
        config: Rating hyperparameters.

    Returns:
        Ratings array of shape (T, C, M).
    """
    n_orders, n_matches = orders.shape
    a = enc.a_idx[orders]
    b = enc.b_idx[orders]
    s = enc.scores[orders]
    ratings = np.full((n_orders, len(enc.model_ids)), float(config.initial_rating))
    out = np.empty((n_matches, n_orders, len(enc.model_ids)))
    rows = np.arange(n_orders)
    k = config.k_factor
    per_point = config.log_base_per_point
    with np.errstate(over="ignore"):
        for t in range(n_matches):
            at, bt = a[:, t], b[:, t]
            ra = ratings[rows, at]
            rb = ratings[rows, bt]
            # same expression as expected_score_array, inlined for speed
            delta = k * (s[:, t] - 1.0 / (1.0 + np.exp((rb - ra) * per_point)))
            ratings[rows, at] = ra + delta
            ratings[rows, bt] = rb - delta
            out[t] = ratings
    return out


@dataclass
class _ChunkResult:
    count: int
    mean: np.ndarray
    m2: np.ndarray
    finals: np.ndarray
    trajectories: np.ndarray | None


def _run_chunk(
    enc: EncodedSequence, config: RatingConfig, master_seed: int, lo: int, hi: int, keep: bool
) -> _ChunkResult:
    orders = np.stack([permutation_order(len(enc), master_seed, i) for i in range(lo, hi)])
    traj = replay_orders(enc, orders, config)
    mean = traj.mean(axis=1)
    m2 = ((traj - mean[:, None, :]) ** 2).sum(axis=1)
    return _ChunkResult(
        count=hi - lo,
        mean=mean,
        m2=m2,
        finals=traj[-1].copy(),
        trajectories=np.ascontiguousarray(traj.transpose(1, 0, 2)) if keep else None,
    )


def _merge_moments(
    acc: tuple[int, np.ndarray, np.ndarray], chunk: _ChunkResult
) -> tuple[int, np.ndarray, np.ndarray]:
    # pairwise update of running mean and sum of squared deviations
    count, mean, m2 = acc
    n = count + chunk.count
    delta = chunk.mean - mean
    return (
        n,
        mean + delta * (chunk.count / n),
        m2 + chunk.m2 + delta**2 * (count * chunk.count / n),
    )


def run_permutations(
    sequence: Sequence[MatchRecord] | EncodedSequence,
    n_perms: int,
    master_seed: int,
    config: RatingConfig = DEFAULT_CONFIG,
    *,
    workers: int = 1,
    keep_trajectories: bool = False,
    chunk_size: int = CHUNK_SIZE,
) -> PermutationSummary:
    """Replay ``n_perms`` orderings of one outcome sequence and aggregate them.

    Ratings are reset for every ordering. Mean and SEM are taken per match
    index across orderings. Ties excluded by the policy are removed before
    permuting, so every ordering has the same length.

    ``workers > 1`` distributes chunks over processes; the output is
    bit-identical to the serial run.
    """
    if int(n_perms) != n_perms or n_perms < 1:
        raise ValueError(f"n_perms must be a positive integer, got {n_perms}")
    enc = sequence if isinstance(sequence, EncodedSequence) else encode_sequence(sequence, config)
    bounds = [(lo, min(lo + chunk_size, n_perms)) for lo in range(0, n_perms, chunk_size)]
    args = [(enc, config, master_seed, lo, hi, keep_trajectories) for lo, hi in bounds]
    if workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, *zip(*args)))
    else:
        results = [_run_chunk(*a) for a in args]

    first = results[0]
    moments = (first.count, first.mean, first.m2)
    for res in results[1:]:
        moments = _merge_moments(moments, res)
    _, mean, m2 = moments
    if n_perms > 1:
        sem_ratings = np.sqrt(m2 / (n_perms - 1)) / math.sqrt(n_perms)
    else:
        sem_ratings = np.zeros_like(mean)
    return PermutationSummary(
        model_ids=enc.model_ids,
        mean_ratings=mean,
        sem_ratings=sem_ratings,
        final_ratings_per_perm=np.concatenate([r.finals for r in results]),
        n_perms=n_perms,
        ties_dropped=enc.ties_dropped,
        trajectories=np.concatenate([r.trajectories for r in results]) if keep_trajectories else None,
    )


def sem(values: Sequence[float]) -> float:
    """Standard error of the mean: sample sd (n - 1 denominator) over sqrt(n)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("sem of an empty list is undefined")
    if arr.size == 1:
        return 0.0
    return float(arr.std(ddof=1) / math.sqrt(arr.size))
