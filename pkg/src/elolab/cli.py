"""Command-line entry point: ``elolab <command> [options]``.

Commands write their table to ``--out`` (stdout when omitted). On failure a
single JSON line ``{"error": ..., "type": ...}`` goes to stderr and the exit
code is non-zero.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence

from . import io
from .engine import RatingConfig, TiePolicy
from .experiments import (
    DEFAULT_K_VALUES,
    DEFAULT_N_PERMS_VALUES,
    DEFAULT_TRANSITIVITY_CONFIGS,
    k_sweep,
    nperms_curve,
    recommend_settings,
    transitivity_experiment,
    transitivity_from_sequence,
)
from .permutation import replay, run_permutations
from .seeding import derive_seed
from .synth import (
    SCENARIO_PROBABILITIES,
    MatchRecord,
    PairSpec,
    ScenarioSpec,
    interleave,
    multinomial_outcomes,
    named_scenario,
)

log = logging.getLogger("elolab")


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _config_pair(text: str) -> tuple[int, float]:
    n, _, k = text.partition(":")
    return int(n), float(k)


def _pair_arg(text: str) -> tuple[str, str, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected MODEL_A:MODEL_B:P_WIN, got {text!r}")
    return parts[0], parts[1], float(parts[2])


def _common(p: argparse.ArgumentParser, *, k_list: bool = False, n_perms_list: bool = False) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--tie-policy", choices=[t.value for t in TiePolicy], default=TiePolicy.EXCLUDE.value)
    p.add_argument("--initial-rating", type=float, default=1400.0)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=io.FORMATS, default="csv")
    p.add_argument("--workers", type=int, default=1, help="worker processes for permutation replays")
    if k_list:
        p.add_argument("--k", type=_float_list, default=list(DEFAULT_K_VALUES), help="comma-separated K values")
    else:
        p.add_argument("--k", type=float, default=16.0, help="K-factor (default 16)")
    if n_perms_list:
        p.add_argument(
            "--n-perms", type=_int_list, default=list(DEFAULT_N_PERMS_VALUES), help="comma-separated orderings"
        )


def _synthetic(p: argparse.ArgumentParser, *, p_list: bool = False) -> None:
    if p_list:
        p.add_argument("--p-win", type=_float_list, default=[0.51, 0.55, 0.6], help="comma-separated P(A beats B)")
    else:
        p.add_argument("--p-win", type=float, default=0.55, help="P(A beats B)")
    p.add_argument("--p-tie", type=float, default=0.0)
    p.add_argument("--n-games", type=int, default=1000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elolab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one Bernoulli sequence between A and B, replayed once")
    _synthetic(p)
    _common(p)
    p.add_argument("--matches-out", help="also write the generated matches as a feedback CSV")

    p = sub.add_parser("permute", help="mean/SEM trajectories across shuffled orderings")
    _synthetic(p)
    _common(p)
    p.add_argument("--n-perms", type=int, default=100)
    p.add_argument("--input", help="feedback CSV (or fixture:<name>) instead of a synthetic pair")
    p.add_argument("--curve", type=_int_list, help="emit mean final rating of --model vs these n_perms values")
    p.add_argument("--model", help="model for --curve (default: first model A)")

    p = sub.add_parser("sweep", help="final rating difference over K x n_perms (x p_win)")
    _synthetic(p, p_list=True)
    _common(p, k_list=True, n_perms_list=True)
    p.add_argument("--input", help="feedback CSV (or fixture:<name>) instead of synthetic pairs")
    p.add_argument("--models", help="MODEL_A,MODEL_B to compare for --input (default: first record)")

    p = sub.add_parser("transitivity", help="three-model ranking check across (n_perms, K) configurations")
    p.add_argument("--scenario", choices=[*SCENARIO_PROBABILITIES, "custom"], default="king")
    p.add_argument("--n-games", type=int, default=1000, help="games per pairing")
    p.add_argument("--pair", type=_pair_arg, action="append", help="custom pairing MODEL_A:MODEL_B:P_WIN")
    p.add_argument("--input", action="append", help="feedback CSVs to interleave instead of a scenario")
    p.add_argument("--expected", help="comma-separated expected order, best first")
    p.add_argument(
        "--config",
        type=_config_pair,
        action="append",
        help="N_PERMS:K configuration, repeatable (default 1:1 100:1 1:16 100:16)",
    )
    _common(p)

    p = sub.add_parser("ingest", help="win-rate table of a feedback CSV")
    p.add_argument("--input", required=True, help="feedback CSV (or fixture:<name>)")
    p.add_argument("--out")
    p.add_argument("--format", choices=io.FORMATS, default="csv")

    p = sub.add_parser("recommend", help="suggested K and n_perms for an estimated win rate")
    p.add_argument("--p-win", type=float, required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=io.FORMATS, default="jsonl")
    return parser


def _config(args: argparse.Namespace, k: float | None = None) -> RatingConfig:
    return RatingConfig(
        initial_rating=args.initial_rating,
        k_factor=args.k if k is None else k,
        tie_policy=TiePolicy(args.tie_policy),
    )


def _synthetic_sequence(args: argparse.Namespace, p_win: float) -> list[MatchRecord]:
    pair = PairSpec("A", "B", p_win, args.p_tie, args.n_games)
    return multinomial_outcomes(pair, derive_seed(args.seed, "cli-outcomes"))


def _load(path: str, args: argparse.Namespace) -> list[MatchRecord]:
    batch = io.load_feedback(path, args.tie_policy)
    if batch.ties_dropped:
        log.info("%s: %d ties excluded", path, batch.ties_dropped)
    if not batch.records:
        raise ValueError(f"{path}: no usable matches")
    return batch.records


def cmd_simulate(args: argparse.Namespace) -> None:
    seq = _synthetic_sequence(args, args.p_win)
    if args.matches_out:
        io.write_feedback(args.matches_out, io.matches_to_feedback(seq))
    io.emit_trajectory(replay(seq, _config(args)), args.out, args.format)


def cmd_permute(args: argparse.Namespace) -> None:
    seq = _load(args.input, args) if args.input else _synthetic_sequence(args, args.p_win)
    config = _config(args)
    if args.curve:
        model = args.model or seq[0].model_a
        points = nperms_curve(seq, model, args.curve, args.seed, config, workers=args.workers)
        io.emit_curve(model, points, args.out, args.format)
        return
    summary = run_permutations(seq, args.n_perms, args.seed, config, workers=args.workers)
    io.emit_summary(summary, args.out, args.format)


def cmd_sweep(args: argparse.Namespace) -> None:
    config = _config(args, k=1.0)
    if args.input:
        seq = _load(args.input, args)
        models = tuple(args.models.split(",")) if args.models else None
        grid = k_sweep(
            seq,
            k_values=args.k,
            n_perms_values=args.n_perms,
            master_seed=args.seed,
            config=config,
            models=models,
            workers=args.workers,
        )
    else:
        grid = k_sweep(
            PairSpec("A", "B", args.p_win[0], args.p_tie, args.n_games),
            k_values=args.k,
            n_perms_values=args.n_perms,
            p_values=args.p_win,
            master_seed=args.seed,
            config=config,
            workers=args.workers,
        )
    io.emit_grid(grid, args.out, args.format)


def cmd_transitivity(args: argparse.Namespace) -> None:
    config = _config(args, k=1.0)
    configs = args.config or list(DEFAULT_TRANSITIVITY_CONFIGS)
    expected = tuple(args.expected.split(",")) if args.expected else None
    if args.input:
        if expected is None:
            raise ValueError("--expected is required with --input")
        groups = [_load(path, args) for path in args.input]
        seq = interleave(groups, args.seed)
        report = transitivity_from_sequence("ingested", seq, expected, configs, args.seed, config, args.workers)
    else:
        if args.scenario == "custom":
            if not args.pair:
                raise ValueError("--scenario custom needs at least one --pair")
            pairs = tuple(PairSpec(a, b, p, n_games=args.n_games) for a, b, p in args.pair)
            scenario = ScenarioSpec("custom", pairs, args.seed, expected or ())
        else:
            scenario = named_scenario(args.scenario, args.n_games, interleave_seed=args.seed)
            if expected:
                scenario = ScenarioSpec(scenario.name, scenario.pair_specs, scenario.interleave_seed, expected)
        report = transitivity_experiment(scenario, configs, args.seed, config, args.workers)
    io.emit_report(report, args.out, args.format)


def cmd_ingest(args: argparse.Namespace) -> None:
    # half_score keeps ties so the table can count them
    batch = io.load_feedback(args.input, TiePolicy.HALF_SCORE)
    io.emit_win_rates(io.win_rates(batch.records), args.out, args.format)


def cmd_recommend(args: argparse.Namespace) -> None:
    io.emit_recommendation(args.p_win, recommend_settings(args.p_win), args.out, args.format)


COMMANDS = {
    "simulate": cmd_simulate,
    "permute": cmd_permute,
    "sweep": cmd_sweep,
    "transitivity": cmd_transitivity,
    "ingest": cmd_ingest,
    "recommend": cmd_recommend,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError, KeyError) as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
