import csv
import json

import numpy as np
import pytest

from elolab import io
from elolab.engine import TiePolicy
from elolab.experiments import k_sweep, transitivity_experiment
from elolab.permutation import replay, run_permutations
from elolab.synth import MatchRecord, Outcome, PairSpec, multinomial_outcomes, named_scenario


def _write(path, rows, header="prompt_id,model_a,model_b,winner"):
    path.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")
    return path


@pytest.mark.parametrize(
    "name, a, b, rate_a",
    [
        ("flan-xxl-vs-dolly-12b", "Flan-t5-xxl", "Dolly-v2-12b", 0.79),
        ("flan-xxl-vs-flan-xl", "Flan-t5-xxl", "Flan-t5-xl", 0.64),
        ("dolly-7b-vs-dolly-12b", "Dolly-v2-7b", "Dolly-v2-12b", 0.51),
    ],
)
def test_bundled_fixtures_reproduce_win_rates(name, a, b, rate_a):
    batch = io.load_feedback(f"fixture:{name}")
    assert len(batch) == 100
    table = io.win_rates(batch.records)
    assert table.rate(a, b) == rate_a
    assert table.rate(b, a) == pytest.approx(1 - rate_a, abs=1e-15)


@pytest.mark.parametrize("name", io.FIXTURES)
def test_bundled_fixtures_match_generator(name):
    assert io.read_feedback(f"fixture:{name}") == io.fixture_feedback(name)


def test_unknown_fixture():
    with pytest.raises(ValueError, match="unknown fixture"):
        io.load_feedback("fixture:nope")


def test_all_ties_under_exclude(tmp_path):
    path = _write(tmp_path / "ties.csv", [f"p{i},A,B,tie" for i in range(10)])
    with pytest.warns(UserWarning, match="10 ties"):
        batch = io.load_feedback(path)
    assert batch.records == []
    assert batch.ties_dropped == 10


def test_ties_kept_under_half_score(tmp_path):
    path = _write(tmp_path / "mix.csv", ["p1,A,B,tie", "p2,A,B,model_a"])
    batch = io.load_feedback(path, TiePolicy.HALF_SCORE)
    assert [r.outcome for r in batch.records] == [Outcome.TIE, Outcome.A_WINS]
    assert batch.ties_dropped == 0


def test_empty_data_section_warns(tmp_path):
    path = _write(tmp_path / "empty.csv", [])
    with pytest.warns(UserWarning):
        batch = io.load_feedback(path)
    assert batch.records == [] and batch.warnings


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        io.load_feedback("/no/such/file.csv")


def test_header_mismatch(tmp_path):
    path = _write(tmp_path / "bad.csv", ["p1,A,B,model_a"], header="id,a,b,w")
    with pytest.raises(io.FeedbackFormatError) as err:
        io.load_feedback(path)
    assert err.value.problems[0][0] == 1


def test_malformed_rows_reported_with_line_numbers(tmp_path):
    path = _write(
        tmp_path / "bad.csv",
        ["p1,A,B,model_a", "p2,A,B,draw", "p3,A,A,model_b", "p4,A,B", "p5,A,B,model_b"],
    )
    with pytest.raises(io.FeedbackFormatError) as err:
        io.load_feedback(path)
    lines = [n for n, _ in err.value.problems]
    assert lines == [3, 4, 5]
    assert "draw" in err.value.problems[0][1]
    assert "self-match" in err.value.problems[1][1]


def test_feedback_round_trip(tmp_path):
    records = io.matches_to_feedback(multinomial_outcomes(PairSpec("m,1", "m\"2", 0.4, 0.2, 50), 3))
    path = tmp_path / "rt.csv"
    io.write_feedback(path, records)
    assert io.read_feedback(path) == records


def test_match_round_trip_preserves_sequence(tmp_path):
    seq = multinomial_outcomes(PairSpec("A", "B", 0.4, 0.2, 80), 1)
    path = tmp_path / "seq.csv"
    io.write_feedback(path, io.matches_to_feedback(seq))
    assert io.load_feedback(path, TiePolicy.HALF_SCORE).records == seq


def test_ingested_pipeline_equals_synthetic(tmp_path):
    seq = multinomial_outcomes(PairSpec("A", "B", 0.55, n_games=300), 2)
    path = tmp_path / "seq.csv"
    io.write_feedback(path, io.matches_to_feedback(seq))
    loaded = io.load_feedback(path).records
    a = run_permutations(seq, 20, 4)
    b = run_permutations(loaded, 20, 4)
    np.testing.assert_array_equal(a.mean_ratings, b.mean_ratings)
    np.testing.assert_array_equal(a.sem_ratings, b.sem_ratings)


# -- win rates ----------------------------------------------------------------


def _matches(a_wins, b_wins, ties=0):
    out = [MatchRecord("A", "B", Outcome.A_WINS)] * a_wins + [MatchRecord("A", "B", Outcome.B_WINS)] * b_wins
    return out + [MatchRecord("A", "B", Outcome.TIE)] * ties


@pytest.mark.parametrize("a, b", [(64, 36), (51, 49), (79, 21)])
def test_win_rate_examples(a, b):
    table = io.win_rates(_matches(a, b))
    assert table.rate("A", "B") == a / 100
    assert table.rate("B", "A") == b / 100


def test_win_rates_ignore_ties_in_rate():
    table = io.win_rates(_matches(3, 1, ties=6))
    row = table.rows[0]
    assert (row.wins, row.losses, row.ties) == (3, 1, 6)
    assert row.win_rate == 0.75


def test_all_ties_rate_undefined():
    table = io.win_rates(_matches(0, 0, ties=4))
    assert table.rate("A", "B") is None
    assert table.rows[0].ties == 4


def test_win_rates_merge_both_orientations():
    recs = [MatchRecord("A", "B", Outcome.A_WINS), MatchRecord("B", "A", Outcome.A_WINS)]
    table = io.win_rates(recs)
    assert len(table.rows) == 2
    assert table.rate("A", "B") == 0.5


def test_win_rates_empty():
    assert io.win_rates([]).rows == ()


# -- emitters -----------------------------------------------------------------


def test_summary_schema(tmp_path):
    seq = multinomial_outcomes(PairSpec("A", "B", 0.6, n_games=30), 0)
    path = tmp_path / "s.csv"
    io.emit_summary(run_permutations(seq, 1, 0), path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["match_index", "mean_A", "sem_A", "mean_B", "sem_B"]
    assert len(rows) == 31
    assert rows[1][0] == "1" and rows[1][1] in ("1408.0000", "1392.0000")


def test_trajectory_schema(tmp_path):
    path = tmp_path / "t.csv"
    io.emit_trajectory(replay([MatchRecord("A", "B", Outcome.A_WINS)]), path)
    assert path.read_text() == "match_index,rating_A,rating_B\n1,1408.0000,1392.0000\n"


def test_grid_layout(tmp_path):
    grid = k_sweep(PairSpec("A", "B", 0.6, n_games=50), k_values=[1, 16], n_perms_values=[1, 10], master_seed=0)
    path = tmp_path / "g.csv"
    io.emit_grid(grid, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["p_win", "k", "n_perms_1", "n_perms_10"]
    assert [r[1] for r in rows[1:]] == ["1", "16"]
    assert float(rows[2][3]) == pytest.approx(grid.cell(16, 10), abs=1e-4)


def test_grid_jsonl(tmp_path):
    grid = k_sweep(PairSpec("A", "B", 0.6, n_games=50), k_values=[1, 16], n_perms_values=[1, 10], master_seed=0)
    path = tmp_path / "g.jsonl"
    io.emit_grid(grid, path, "jsonl")
    records = [json.loads(line) for line in path.read_text().splitlines()]
    assert records[0]["record"] == "grid"
    assert sum(r["record"] == "cell" for r in records) == 4


def test_report_layout(tmp_path):
    rep = transitivity_experiment(named_scenario("rook", n_games=200), master_seed=0)
    path = tmp_path / "r.csv"
    io.emit_report(rep, path)
    rows = list(csv.reader(path.open()))
    assert rows[0][:4] == ["model", "mean_n1_k1", "sem_n1_k1", "flag_n1_k1"]
    assert [r[0] for r in rows[1:]] == ["A", "B", "C"]
    assert len(rows[0]) == 1 + 3 * 4

    jpath = tmp_path / "r.jsonl"
    io.emit_report(rep, jpath, "jsonl")
    records = [json.loads(line) for line in jpath.read_text().splitlines()]
    assert records[0] == {"record": "scenario", "scenario": "rook", "expected": ["A", "B", "C"], "master_seed": 0}
    assert sum(r["record"] == "rating" for r in records) == 12
    flagged = {(r["n_perms"], r["k"]) for r in records if r["record"] == "violation"}
    assert flagged == {(r.n_perms, float(r.k_factor)) for r in rep.results if r.violated}


def test_emitters_byte_deterministic(tmp_path):
    def run(path):
        seq = multinomial_outcomes(PairSpec("A", "B", 0.55, n_games=200), 9)
        io.emit_summary(run_permutations(seq, 20, 9), path)
        return path.read_bytes()

    assert run(tmp_path / "a.csv") == run(tmp_path / "b.csv")


def test_negative_zero_formatting():
    assert io.fmt_float(-1e-9) == "0.0000"
    assert io.fmt_float(float("nan")) == ""


def test_bad_format(tmp_path):
    with pytest.raises(ValueError):
        io.emit_trajectory(replay([MatchRecord("A", "B", Outcome.A_WINS)]), tmp_path / "x", "xml")


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        io.emit_win_rates(io.win_rates(_matches(1, 1)), tmp_path / "missing" / "dir" / "x.csv")
