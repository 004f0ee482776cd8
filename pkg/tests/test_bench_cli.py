import json
import math

import pytest

from abr.bench import BenchReport, Z_95, materialize, run_bench, run_query
from abr.cli import main
from abr.plan import plan_to_json
from abr.queries import q1, q5


# ----------------------------------------------------------------- bench


def test_bench_report_arithmetic_recomputable():
    report = BenchReport("q1", "compiled", warmup_runs=2)
    report.runs = [(0.001, 0.004), (0.002, 0.003), (0.001, 0.006)]
    report.result_rows = 1
    body = report.to_json()
    totals = [r["totalMs"] for r in body["runs"]]
    assert totals == pytest.approx([5.0, 5.0, 7.0])
    mean = sum(totals) / len(totals)
    assert body["meanMs"] == pytest.approx(mean)
    std = math.sqrt(sum((t - mean) ** 2 for t in totals) / (len(totals) - 1))
    assert body["stdMs"] == pytest.approx(std)
    assert body["ci95Ms"] == pytest.approx(Z_95 * std / math.sqrt(3))
    assert body["measuredRuns"] == 3
    assert body["warmupRuns"] == 2


def test_bench_single_trial_has_no_ci():
    report = BenchReport("q1", "compiled", warmup_runs=0)
    report.runs = [(0.001, 0.001)]
    assert report.ci95_ms is None
    assert report.to_json()["ci95Ms"] is None


def test_run_bench_counts_runs(sf_db):
    report = run_bench(q1(), sf_db, "q1", "compiled", warmup=2, trials=3)
    assert len(report.runs) == 3
    # compiled backend re-compiles each run; compile time must be recorded
    assert all(c > 0 for c, _ in report.runs)
    text = report.to_text()
    assert "compile + execute" in text


def test_reference_backend_reports_zero_compile(sf_db):
    _, compile_s, exec_s = run_query(q1(), sf_db, "reference")
    assert compile_s == 0.0
    assert exec_s > 0


# ----------------------------------------------------------------- CLI


@pytest.fixture(scope="module")
def sf_db():
    from abr.ingest import GenParams, gen_tpch_subset

    return gen_tpch_subset(GenParams(0.001, 42))


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    assert main(["gen", "--scale-factor", "0.001", "--seed", "42",
                 "--out-dir", str(d)]) == 0
    return d


def test_cli_gen_writes_files(data_dir):
    names = sorted(p.name for p in data_dir.iterdir())
    assert names == [
        "lineitem.schema.json",
        "lineitem.tbl",
        "orders.schema.json",
        "orders.tbl",
    ]


def test_cli_load_single_table(data_dir, capsys):
    rc = main([
        "load",
        "--tbl", str(data_dir / "orders.tbl"),
        "--schema", str(data_dir / "orders.schema.json"),
    ])
    assert rc == 0
    assert "loaded orders: 1500 rows" in capsys.readouterr().out


def test_cli_query_json_matches_generated(data_dir, capsys):
    rc = main(["query", "q1", "--data-dir", str(data_dir), "--output", "json"])
    assert rc == 0
    loaded = json.loads(capsys.readouterr().out)
    rc = main(["query", "q1", "--scale-factor", "0.001", "--seed", "42",
               "--output", "json"])
    assert rc == 0
    generated = json.loads(capsys.readouterr().out)
    assert loaded["columns"] == generated["columns"]
    assert loaded["rows"] == generated["rows"]
    assert loaded["stats"]["rows"] == loaded["rows"]


def test_cli_query_backends_agree(data_dir, capsys):
    outs = []
    for backend in ("compiled", "reference"):
        assert main(["query", "q3", "--data-dir", str(data_dir),
                     "--backend", backend, "--output", "json"]) == 0
        outs.append(json.loads(capsys.readouterr().out)["columns"])
    assert outs[0] == outs[1]


def test_cli_plan_file(data_dir, tmp_path, capsys):
    plan_path = tmp_path / "plan.json"
    from abr.ingest import GenParams, gen_tpch_subset

    db = gen_tpch_subset(GenParams(0.001, 42))
    plan_path.write_text(json.dumps(plan_to_json(q1().to_plan(db.schemas()))))
    assert main(["query", "--plan-file", str(plan_path),
                 "--data-dir", str(data_dir), "--output", "json"]) == 0
    via_file = json.loads(capsys.readouterr().out)
    assert main(["query", "q1", "--data-dir", str(data_dir),
                 "--output", "json"]) == 0
    builtin = json.loads(capsys.readouterr().out)
    assert via_file["columns"] == builtin["columns"]


def test_cli_bench_json_shape(data_dir, capsys):
    rc = main(["bench", "q1", "--data-dir", str(data_dir),
               "--warmup", "1", "--trials", "3", "--output", "json"])
    assert rc == 0
    body = json.loads(capsys.readouterr().out)
    assert body["warmupRuns"] == 1
    assert body["measuredRuns"] == 3
    assert len(body["runs"]) == 3
    for run in body["runs"]:
        assert run["totalMs"] == pytest.approx(
            run["compileMs"] + run["execMs"]
        )
    mean = sum(r["totalMs"] for r in body["runs"]) / 3
    assert body["meanMs"] == pytest.approx(mean)
    assert body["ciMethod"] == "normal approximation, 95%"


def test_cli_materialize_then_query(data_dir, tmp_path, capsys):
    from abr.ingest import GenParams, gen_tpch_subset
    from abr.queries import filter_on_materialized, q6

    db = gen_tpch_subset(GenParams(0.001, 42))
    follow = tmp_path / "follow.json"
    base, _ = materialize(q6(), db, "jan_orders", "compiled")
    follow.write_text(json.dumps(plan_to_json(
        filter_on_materialized("jan_orders", "1996-01-06").to_plan(
            base.schemas()
        )
    )))
    rc = main(["materialize", "q6", "--name", "jan_orders",
               "--data-dir", str(data_dir),
               "--then-plan-file", str(follow), "--output", "json"])
    assert rc == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("materialized jan_orders:")
    json.loads(out[1])  # follow-up result is valid JSON


def test_cli_error_exit_codes(capsys, tmp_path):
    assert main(["query", "q1"]) == 1  # no data source
    assert "error:" in capsys.readouterr().err
    assert main(["query", "nope", "--scale-factor", "0.001"]) == 1
    assert "error:" in capsys.readouterr().err
    assert main(["query", "q1", "--data-dir", str(tmp_path / "missing")]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_table_output_renders(data_dir, capsys):
    assert main(["query", "q4", "--data-dir", str(data_dir)]) == 0
    out = capsys.readouterr().out
    assert "o_orderdate" in out
    assert "rows, compile" in out
