import json

from pathsat.cli import main


def test_run_linear(capsys):
    assert main(["run", "linear.tp", "--input", '{"a":[0],"d":1,"z":7}']) == 0
    assert capsys.readouterr().out.strip() == "a -b -a"


def test_run_outputs_and_input_file(tmp_path, capsys):
    f = tmp_path / "in.json"
    f.write_text('{"b":[3,1,2],"n":3}')
    assert main(["run", "bubble", "--input", f"@{f}", "--outputs"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert json.loads(lines[1])["b"] == [1, 2, 3]


def test_run_bad_input_is_usage_error():
    assert main(["run", "linear", "--input", '{"a":[0],"d":1}']) == 1


def test_run_fault_exit_3(tmp_path, capsys):
    src = tmp_path / "oob.tp"
    src.write_text("fn f(a: int[], n: int) { let i; for (i = 0; i <= n; i = i + 1) { a[i] = 1; } }")
    (tmp_path / "oob.schema.json").write_text(json.dumps({"params": [
        {"name": "a", "kind": "int[]", "role": "array", "dims": ["n"]},
        {"name": "n", "kind": "int", "role": "size"}]}))
    assert main(["run", str(src), "--input", '{"a":[0],"n":1}']) == 3
    assert "partial path: a a" in capsys.readouterr().err


def test_predict_matrix(capsys):
    assert main(["predict", "matrix", "--dims", "4,4,4"]) == 0
    assert capsys.readouterr().out.strip() == "k_L=64 k_S=65 l_max=105"


def test_predict_merge_json(capsys):
    assert main(["predict", "merge", "--dims", "3", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["k_s"] is None


def test_explore_missing_subject(capsys):
    assert main(["explore", "missing.tp"]) == 2
    assert "missing.tp" in capsys.readouterr().err


def test_explore_parse_error(tmp_path, capsys):
    src = tmp_path / "bad.tp"
    src.write_text("fn f(x: int) { let = 3; }")
    (tmp_path / "bad.schema.json").write_text('{"params": [{"name": "x", "kind": "int", "role": "key"}]}')
    assert main(["explore", str(src)]) == 2
    assert "1:" in capsys.readouterr().err


def test_explore_bad_batch():
    assert main(["explore", "linear", "--batch", "0"]) == 1


def test_unknown_command():
    assert main(["frobnicate"]) == 1


def test_explore_suite_report_pipeline(tmp_path, capsys):
    out = tmp_path / "out"
    store = tmp_path / "store.json"
    assert main(["explore", "linear", "--max-size", "3", "--domain", "3", "--stable-time",
                 "--store", str(store), "-o", str(out)]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("k_L=3 ")
    assert (out / "report.csv").read_text().startswith("k,test_cases,ufp,nfp,llp,etime_ms\n")
    summary = json.loads((out / "summary.json").read_text())
    assert summary["k_l"] == 3 and summary["l_max"] == 7

    assert main(["suite", "linear", str(out / "suite.json")]) == 0
    assert main(["predict", "linear", "--dims", "3", "--store", str(store)]) == 0
    rows = json.loads(store.read_text())["rows"]
    assert {r["source"] for r in rows} == {"measured", "predicted"}

    assert main(["report", str(out / "report.csv"), "-o", str(tmp_path / "plots")]) == 0
    merged = (tmp_path / "plots" / "merged.csv").read_text().splitlines()
    assert merged[0] == "source,k,test_cases,ufp,nfp,llp,etime_ms"
    assert (tmp_path / "plots" / "k_vs_nfp.csv").exists()


def test_suite_mismatch_exit_3(tmp_path):
    out = tmp_path / "o"
    assert main(["explore", "linear", "--max-size", "2", "--domain", "2", "-o", str(out)]) == 0
    doc = json.loads((out / "suite.json").read_text())
    doc["entries"][0]["path"] = "a a a"
    (out / "suite.json").write_text(json.dumps(doc))
    assert main(["suite", "linear", str(out / "suite.json")]) == 3


def test_oracle_command(tmp_path, capsys):
    out = tmp_path / "o.json"
    assert main(["oracle", "linear", "--max-size", "1", "--domain", "2", "-o", str(out)]) == 0
    paths = {e["path"] for e in json.loads(out.read_text())["entries"]}
    assert paths == {"-a", "a b -a", "a -b -a"}


def test_oracle_too_large():
    assert main(["oracle", "bubble", "--max-size", "9", "--domain", "9", "--cap", "100"]) == 3


def test_explore_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"max_size": {"n1": 1, "n2": 1}, "domain": 3,
                               "stop_rule": {"type": "saturation", "window": 5}}))
    assert main(["explore", "merge", "--config", str(cfg), "-o", str(tmp_path / "o")]) == 0
    assert main(["explore", "merge", "--config", str(cfg), "--window", "0",
                 "-o", str(tmp_path / "o")]) == 1


def test_report_missing_file():
    assert main(["report", "nope.csv"]) == 1
