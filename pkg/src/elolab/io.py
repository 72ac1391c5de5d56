"""Feedback ingestion and deterministic result serialisation.

Feedback files are UTF-8 CSV with the header ``prompt_id,model_a,model_b,winner``
where ``winner`` is one of ``model_a``, ``model_b`` or ``tie``.

Every emitter writes either CSV (``fmt="csv"``) or one JSON object per line
(``fmt="jsonl"``). Floats are written fixed-point with four decimals and rows
come out in a fixed order, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import sys
import warnings
from collections.abc import Iterable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import IO, Any

from .engine import TiePolicy
from .experiments import CurvePoint, Recommendation, SweepGrid, TransitivityReport, check_transitivity
from .permutation import PermutationSummary, Trajectory
from .seeding import make_rng
from .synth import MatchRecord, Outcome

log = logging.getLogger(__name__)

FEEDBACK_HEADER = ("prompt_id", "model_a", "model_b", "winner")
FORMATS = ("csv", "jsonl")

FIXTURE_PREFIX = "fixture:"
# name -> (model_a, model_b, wins_a, wins_b); 100 non-tie games each
FIXTURES: dict[str, tuple[str, str, int, int]] = {
    "flan-xxl-vs-dolly-12b": ("Flan-t5-xxl", "Dolly-v2-12b", 79, 21),
    "flan-xxl-vs-flan-xl": ("Flan-t5-xxl", "Flan-t5-xl", 64, 36),
    "dolly-7b-vs-dolly-12b": ("Dolly-v2-7b", "Dolly-v2-12b", 51, 49),
}


class Winner(str, Enum):
    MODEL_A = "model_a"
    MODEL_B = "model_b"
    TIE = "tie"


_WINNER_TO_OUTCOME = {Winner.MODEL_A: Outcome.A_WINS, Winner.MODEL_B: Outcome.B_WINS, Winner.TIE: Outcome.TIE}
_OUTCOME_TO_WINNER = {v: k for k, v in _WINNER_TO_OUTCOME.items()}


@dataclass(frozen=True)
class FeedbackRecord:
    prompt_id: str
    model_a: str
    model_b: str
    winner: Winner

    def __post_init__(self) -> None:
        if self.model_a == self.model_b:
            raise ValueError(f"self-match: {self.model_a!r}")
        object.__setattr__(self, "winner", Winner(self.winner))


class FeedbackFormatError(ValueError):
    """A feedback file could not be parsed.

    ``problems`` lists ``(line_number, message)`` for every bad row; line 1 is
    the header.
    """

    def __init__(self, path: str | Path, problems: list[tuple[int, str]]):
        self.path = str(path)
        self.problems = problems
        detail = "; ".join(f"line {n}: {msg}" for n, msg in problems[:10])
        more = f" (+{len(problems) - 10} more)" if len(problems) > 10 else ""
        super().__init__(f"{self.path}: {detail}{more}")


@dataclass
class FeedbackBatch:
    """Match records loaded from a feedback file, with what was dropped along the way."""

    records: list[MatchRecord]
    ties_dropped: int = 0
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)


def resolve_input(path: str | Path) -> Path:
    """Map ``fixture:<name>`` to a bundled fixture file; other paths pass through."""
    text = str(path)
    if not text.startswith(FIXTURE_PREFIX):
        return Path(path)
    name = text[len(FIXTURE_PREFIX) :]
    if name not in FIXTURES:
        raise ValueError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    return Path(str(resources.files("elolab") / "data" / f"{name}.csv"))


def read_feedback(path: str | Path) -> list[FeedbackRecord]:
    """Parse a feedback CSV, collecting every malformed row before raising."""
    path = resolve_input(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != FEEDBACK_HEADER:
            raise FeedbackFormatError(path, [(1, f"header must be {','.join(FEEDBACK_HEADER)}, got {header}")])
        records: list[FeedbackRecord] = []
        problems: list[tuple[int, str]] = []
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(FEEDBACK_HEADER):
                problems.append((line, f"expected {len(FEEDBACK_HEADER)} fields, got {len(row)}"))
                continue
            prompt_id, model_a, model_b, winner = (cell.strip() for cell in row)
            if winner not in Winner._value2member_map_:
                problems.append((line, f"unknown winner token {winner!r}"))
                continue
            if not model_a or not model_b:
                problems.append((line, "empty model identifier"))
                continue
            if model_a == model_b:
                problems.append((line, f"self-match {model_a!r}"))
                continue
            records.append(FeedbackRecord(prompt_id, model_a, model_b, Winner(winner)))
    if problems:
        raise FeedbackFormatError(path, problems)
    return records


def write_feedback(path: str | Path, records: Iterable[FeedbackRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FEEDBACK_HEADER)
        for r in records:
            writer.writerow((r.prompt_id, r.model_a, r.model_b, r.winner.value))


def feedback_to_matches(
    feedback: Sequence[FeedbackRecord], tie_policy: TiePolicy | str = TiePolicy.EXCLUDE
) -> FeedbackBatch:
    policy = TiePolicy(tie_policy)
    records: list[MatchRecord] = []
    ties = 0
    for fb in feedback:
        if fb.winner is Winner.TIE and policy is TiePolicy.EXCLUDE:
            ties += 1
            continue
        records.append(MatchRecord(fb.model_a, fb.model_b, _WINNER_TO_OUTCOME[fb.winner], len(records)))
    return FeedbackBatch(records, ties)


def matches_to_feedback(records: Sequence[MatchRecord], prefix: str = "match") -> list[FeedbackRecord]:
    return [
        FeedbackRecord(f"{prefix}-{r.sequence_index:06d}", r.model_a, r.model_b, _OUTCOME_TO_WINNER[r.outcome])
        for r in records
    ]


def load_feedback(path: str | Path, tie_policy: TiePolicy | str = TiePolicy.EXCLUDE) -> FeedbackBatch:
    """Read a feedback CSV into match records in file order.

    Ties are dropped and counted under ``exclude`` and kept under
    ``half_score``. A file without data rows yields an empty batch and a
    warning.
    """
    batch = feedback_to_matches(read_feedback(path), tie_policy)
    if not batch.records:
        msg = f"{path}: no usable matches"
        if batch.ties_dropped:
            msg += f" ({batch.ties_dropped} ties excluded)"
        batch.warnings.append(msg)
        warnings.warn(msg, stacklevel=2)
    elif batch.ties_dropped:
        log.info("%s: excluded %d ties", path, batch.ties_dropped)
    return batch


@dataclass(frozen=True)
class MatchupRate:
    model: str
    opponent: str
    wins: int
    losses: int
    ties: int

    @property
    def win_rate(self) -> float | None:
        """Wins over non-tie games, or None when every game was a tie."""
        decided = self.wins + self.losses
        return self.wins / decided if decided else None


@dataclass(frozen=True)
class WinRateTable:
    rows: tuple[MatchupRate, ...]

    def rate(self, model: str, opponent: str) -> float | None:
        for row in self.rows:
            if row.model == model and row.opponent == opponent:
                return row.win_rate
        raise KeyError((model, opponent))


def win_rates(records: Iterable[MatchRecord]) -> WinRateTable:
    """Tally each matchup in both directions, in order of first appearance."""
    tallies: dict[tuple[str, str], list[int]] = {}
    for r in records:
        key = (r.model_a, r.model_b)
        if key not in tallies and (r.model_b, r.model_a) in tallies:
            key = (r.model_b, r.model_a)
        tally = tallies.setdefault(key, [0, 0, 0])
        if r.outcome is Outcome.TIE:
            tally[2] += 1
        elif (r.outcome is Outcome.A_WINS) == (r.model_a == key[0]):
            tally[0] += 1
        else:
            tally[1] += 1
    rows = []
    for (a, b), (w, l, t) in tallies.items():
        rows.append(MatchupRate(a, b, w, l, t))
        rows.append(MatchupRate(b, a, l, w, t))
    return WinRateTable(tuple(rows))


def fixture_feedback(name: str, seed: int = 2023) -> list[FeedbackRecord]:
    """Rebuild a bundled fixture: exact win counts in a seeded order."""
    model_a, model_b, wins_a, wins_b = FIXTURES[name]
    winners = [Winner.MODEL_A] * wins_a + [Winner.MODEL_B] * wins_b
    order = make_rng(seed, f"fixture:{name}").permutation(len(winners))
    return [
        FeedbackRecord(f"p{i + 1:03d}", model_a, model_b, winners[j]) for i, j in enumerate(order.tolist())
    ]


# -- emitters -----------------------------------------------------------------


def fmt_float(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    text = f"{x:.4f}"
    return "0.0000" if text == "-0.0000" else text


def _json_value(v: Any) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return "null" if math.isnan(v) else fmt_float(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    raise TypeError(f"cannot serialise {type(v).__name__}")


@contextmanager
def _open_out(path: str | Path | None) -> Iterator[IO[str]]:
    if path is None or str(path) == "-":
        yield sys.stdout
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        yield fh


def _write(path: str | Path | None, fmt: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Write homogeneous rows as CSV, or as JSONL keyed by the header."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    with _open_out(path) as fh:
        if fmt == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt_float(v) if isinstance(v, float) or v is None else v for v in row])
        else:
            for row in rows:
                fh.write(_json_value(dict(zip(header, row))) + "\n")


def _write_records(path: str | Path | None, records: Iterable[dict[str, Any]]) -> None:
    with _open_out(path) as fh:
        for rec in records:
            fh.write(_json_value(rec) + "\n")


def _k_label(k: float) -> str:
    return f"{k:g}"


def emit_trajectory(traj: Trajectory, path: str | Path | None, fmt: str = "csv") -> None:
    """Columns: match_index (1-based), then rating_<model> per model."""
    header = ["match_index", *(f"rating_{m}" for m in traj.model_ids)]
    rows = ([t + 1, *map(float, row)] for t, row in enumerate(traj.ratings))
    _write(path, fmt, header, rows)


def emit_summary(summary: PermutationSummary, path: str | Path | None, fmt: str = "csv") -> None:
    """Columns: match_index (1-based), then mean_<model>, sem_<model> per model."""
    header = ["match_index"]
    for m in summary.model_ids:
        header += [f"mean_{m}", f"sem_{m}"]
    n_models = len(summary.model_ids)

    def rows() -> Iterator[list[Any]]:
        for t in range(summary.mean_ratings.shape[0]):
            row: list[Any] = [t + 1]
            for j in range(n_models):
                row += [float(summary.mean_ratings[t, j]), float(summary.sem_ratings[t, j])]
            yield row

    _write(path, fmt, header, rows())


def emit_grid(grid: SweepGrid, path: str | Path | None, fmt: str = "csv") -> None:
    """CSV: one row per (p_win, k) with one difference column per n_perms value.

    JSONL: a header record, then one record per cell including the share of
    single orderings with a positive difference.
    """
    if fmt == "csv":
        header = ["p_win", "k", *(f"n_perms_{n}" for n in grid.n_perms_values)]
        rows = (
            [float(p), _k_label(k), *(float(grid.cells[i, j, l]) for l in range(len(grid.n_perms_values)))]
            for i, p in enumerate(grid.p_values)
            for j, k in enumerate(grid.k_values)
        )
        _write(path, fmt, header, rows)
        return
    if fmt != "jsonl":
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    head = {
        "record": "grid",
        "source": grid.source,
        "model_a": grid.model_a,
        "model_b": grid.model_b,
        "master_seed": grid.master_seed,
        "k_values": [float(k) for k in grid.k_values],
        "n_perms_values": list(grid.n_perms_values),
        "p_values": [float(p) for p in grid.p_values],
        "wins_a": [float(w) for w in grid.wins_a],
    }
    cells = (
        {
            "record": "cell",
            "p_win": float(p),
            "k": float(k),
            "n_perms": n,
            "difference": float(grid.cells[i, j, l]),
            "positive_fraction": float(grid.positive_fraction[i, j, l]),
        }
        for i, p in enumerate(grid.p_values)
        for j, k in enumerate(grid.k_values)
        for l, n in enumerate(grid.n_perms_values)
    )
    _write_records(path, [head, *cells])


def emit_report(report: TransitivityReport, path: str | Path | None, fmt: str = "csv") -> None:
    """Transitivity table: one row per model, mean/sem/flag column triple per configuration.

    ``flag_*`` is ``*`` when the model takes part in a mis-ordered pair under
    that configuration. JSONL writes scenario, config, rating and violation
    records.
    """
    violations = check_transitivity(report, report.expected_ranking)
    flagged = {(v.n_perms, v.k_factor, m) for v in violations for m in (v.expected_higher, v.expected_lower)}
    if fmt == "csv":
        header = ["model"]
        for res in report.results:
            tag = f"n{res.n_perms}_k{_k_label(res.k_factor)}"
            header += [f"mean_{tag}", f"sem_{tag}", f"flag_{tag}"]
        rows = []
        for m in report.expected_ranking:
            row: list[Any] = [m]
            for res in report.results:
                star = "*" if (res.n_perms, res.k_factor, m) in flagged else ""
                row += [float(res.mean[m]), float(res.sem[m]), star]
            rows.append(row)
        _write(path, fmt, header, rows)
        return
    if fmt != "jsonl":
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    records: list[dict[str, Any]] = [
        {
            "record": "scenario",
            "scenario": report.scenario,
            "expected": list(report.expected_ranking),
            "master_seed": report.master_seed,
        }
    ]
    for res in report.results:
        records.append(
            {
                "record": "config",
                "n_perms": res.n_perms,
                "k": float(res.k_factor),
                "ranking": list(res.ranking),
                "violated": res.violated,
            }
        )
        for m in report.expected_ranking:
            records.append(
                {
                    "record": "rating",
                    "n_perms": res.n_perms,
                    "k": float(res.k_factor),
                    "model": m,
                    "mean": float(res.mean[m]),
                    "sem": float(res.sem[m]),
                }
            )
    for v in violations:
        records.append(
            {
                "record": "violation",
                "n_perms": v.n_perms,
                "k": float(v.k_factor),
                "expected_higher": v.expected_higher,
                "expected_lower": v.expected_lower,
            }
        )
    _write_records(path, records)


def emit_win_rates(table: WinRateTable, path: str | Path | None, fmt: str = "csv") -> None:
    header = ["model", "opponent", "wins", "losses", "ties", "win_rate"]
    rows = ([r.model, r.opponent, r.wins, r.losses, r.ties, r.win_rate] for r in table.rows)
    _write(path, fmt, header, rows)


def emit_curve(model: str, points: Sequence[CurvePoint], path: str | Path | None, fmt: str = "csv") -> None:
    header = ["model", "n_perms", "mean", "sem"]
    _write(path, fmt, header, ([model, p.n_perms, p.mean, p.sem] for p in points))


def emit_recommendation(
    win_rate: float, rec: Recommendation, path: str | Path | None, fmt: str = "jsonl"
) -> None:
    header = ["win_rate", "k", "n_perms", "rationale"]
    _write(path, fmt, header, [[float(win_rate), float(rec.k_factor), rec.n_perms, rec.rationale]])
