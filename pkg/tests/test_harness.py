import json
import subprocess
import sys

import pytest

from shiftsbst import cli, harness
from shiftsbst.corpus import (RUGGED_TARGET, active_easy, corpus, corpus_hash, rugged_period,
                              schedule_cycle, shipped)
from shiftsbst.program import execute, make_objective, make_targets


# ---------------------------------------------------------------- corpus

def test_shipped_corpus_loads():
    progs = shipped()
    assert len(progs) == 15
    assert {p.category for p in progs} == {"plateau", "rugged", "needle", "mixed", "other"}
    assert len({p.name for p in corpus()}) == len(corpus())


def test_family_success_points():
    for per in (1, 2, 4, 8):
        p = rugged_period(per)
        obj = make_objective(p, make_targets(p)[0])
        assert obj((RUGGED_TARGET,)) == 0
        assert obj((RUGGED_TARGET + 1,)) > 0
    s = schedule_cycle(7, 3600)
    inner = [t for t in make_targets(s) if t.key == "b1:T"][0]
    assert make_objective(s, inner)((0,)) == 0
    assert make_objective(s, inner)((86400 * 7 + 3600,)) == 0
    # the only guard fails: approach level 0, distance on the guard
    assert 0 < make_objective(s, inner)((86400,)) < 1


def test_active_easy_irrelevant_dims():
    p = active_easy(4)
    obj = make_objective(p, make_targets(p)[0])
    assert obj((700, 0, 0, 0, 0)) == obj((700, -9, 5, 999, -1000)) == 0
    assert execute(p, (1, 2, 3, 4, 5))["b0"].d_true == 699


def test_corpus_hash_is_stable():
    assert corpus_hash(shipped()) == corpus_hash(shipped())
    assert corpus_hash(shipped()) != corpus_hash(shipped()[1:])


# ---------------------------------------------------------------- config and seeds

def test_parse_config():
    cfg = harness.parse_config("""
        # comment
        time_budget = 0.5
        ga_mutation_steps = -1, 1
        shift_active_dimension_updates = disabled
        ga_max_generations = 12
    """)
    assert cfg.time_budget == 0.5 and cfg.ga_mutation_steps == (-1, 1)
    assert cfg.shift().patience == 10 ** 9 and cfg.ga().max_generations == 12
    with pytest.raises(ValueError):
        harness.parse_config("nonsense = 3")


def test_seed_derivation():
    a = harness.derive_seed(42, "p", "b0:T")
    assert a == harness.derive_seed(42, "p", "b0:T")
    assert a != harness.derive_seed(42, "p", "b0:F") != harness.derive_seed(43, "p", "b0:T")
    assert harness.derive_seed(42, "p", "b0:T", base_only=True) == 42


def test_unknown_algorithm_and_crash_row():
    p = shipped()[0]
    t = make_targets(p)[0]
    with pytest.raises(ValueError):
        harness.run_target("sa", p, t)
    prob = harness.make_problem(p, t)
    prob.evaluate = lambda x: 1 / 0
    r = harness.run_problem("hc", prob, harness.RunConfig(time_budget=0.2), 1)
    assert r.stop == "crash" and "ZeroDivisionError" in r.error and not r.success


# ---------------------------------------------------------------- CSV

def small_suite(alg="hc", budget=0.2):
    progs = [p for p in shipped() if p.name in ("other_loop", "plateau_bucket")]
    return harness.run_suite(alg, progs, harness.RunConfig(time_budget=budget))


def test_csv_shape_and_round_trip(tmp_path):
    rep = small_suite()
    path = harness.save_report(rep, tmp_path)
    text = path.read_bytes().decode()
    assert text.startswith('"algorithm","function"') and "\r\n" in text
    rows = harness.read_csv(text)
    assert [list(r) for r in rows][0] == harness.CSV_FIELDS
    assert len(rows) == rep.targets
    assert harness.coverage_from_rows(rows) == pytest.approx(rep.coverage)
    man = json.loads((tmp_path / "hc_seed42_manifest.json").read_text())
    assert man["corpus_hash"] == rep.manifest.corpus_hash and man["seed"] == 42


def test_strip_timing_blanks_clock_columns():
    rep = small_suite()
    stripped = harness.read_csv(harness.strip_timing(harness.csv_text(rep.rows)))
    assert all(r["total_time"] == "" for r in stripped)
    for r in stripped:
        if r["stop"] == "budget":
            assert r["nfe"] == ""


def test_sweep_rows():
    rows = harness.sweep("irrelevant-dims", [1, 3], ("hc-shift",),
                         harness.RunConfig(time_budget=1))
    assert [r["param"] for r in rows] == [1, 3]
    assert all(r["coverage"] == 100.0 for r in rows) and rows[1]["pruned"] == 3
    table = harness.seed_table([{"algorithm": "a", "coverage": c, "mean_time": 1.0}
                                for c in (90.0, 100.0)])
    assert table[0]["coverage_mean"] == 95.0
    assert table[0]["coverage_cv"] == pytest.approx(5 / 95)


# ---------------------------------------------------------------- CLI

def test_cli_run(tmp_path, capsys):
    assert cli.main(["run", "-a", "hc", "--program", "other_loop", "--budget", "0.2",
                     "--out", str(tmp_path), "-q"]) == 0
    assert "hc:" in capsys.readouterr().out
    assert (tmp_path / "hc_seed42.csv").exists()


def test_cli_events(tmp_path):
    ev = tmp_path / "ev.jsonl"
    cli.main(["run", "--program", "plateau_bucket", "--budget", "0.5", "--out", str(tmp_path),
              "--events", str(ev), "-q"])
    lines = [json.loads(l) for l in ev.read_text().splitlines()]
    assert lines and all("program" in l and "event" in l for l in lines)


def test_cli_dump_and_errors(tmp_path):
    out = tmp_path / "d.csv"
    cli.main(["dump-landscape", "rugged", "2", "--step", "50", "--out", str(out)])
    assert out.read_text().splitlines()[0] == "x0,x1,fitness"
    with pytest.raises(SystemExit):
        cli.main(["run", "--program", "nope", "--out", str(tmp_path)])


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "shiftsbst.cli", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "dump-landscape" in res.stdout
