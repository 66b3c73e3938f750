import csv
import filecmp
import json
from pathlib import Path

import pytest

import dlab
from dlab.cli import main
from dlab.synthetic import write_fixture_tree

FIXTURES = Path(dlab.__file__).parent / "fixtures"
CONFIG = FIXTURES / "config.json"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_bundled_fixtures_match_generator(tmp_path):
    write_fixture_tree(tmp_path)
    cmp = filecmp.dircmp(FIXTURES, tmp_path)
    assert not cmp.left_only and not cmp.right_only and not cmp.diff_files
    assert not filecmp.dircmp(FIXTURES / "macro", tmp_path / "macro").diff_files


def test_label_fixture_matches_hand_walk(tmp_path, capsys):
    code, _, err = run(capsys, "label", "--config", CONFIG, "--ticker", "FIXTURE", "--lookahead", 0,
                       "--out", tmp_path)
    assert code == 0, err
    rows = read_csv(tmp_path / "label" / "episodes_FIXTURE.csv")
    assert len(rows) == 1
    ep = rows[0]
    assert (ep["peak_date"], ep["trough_date"], ep["recovery_date"]) == ("2020-01-02", "2020-01-06", "2020-01-08")
    assert float(ep["depth"]) == pytest.approx(0.11, abs=1e-12)
    assert ep["class"] == "correction"
    labels = [int(r["FIXTURE.target"]) for r in read_csv(tmp_path / "label" / "labels_FIXTURE.csv")]
    assert labels == [0, 0, 1, 0, 0]


def test_cluster_blob_fixture_selects_three(tmp_path, capsys):
    code, _, err = run(capsys, "cluster", "--config", CONFIG, "--matrix", FIXTURES / "blobs.csv",
                       "--k-range", "2:10", "--restarts", 10, "--out", tmp_path)
    assert code == 0, err
    elbow = read_csv(tmp_path / "cluster" / "elbow.csv")
    assert [int(r["k"]) for r in elbow] == list(range(2, 11))
    assert [int(r["k"]) for r in elbow if r["selected"] == "1"] == [3]
    wcss = [float(r["wcss"]) for r in elbow]
    assert all(a >= b for a, b in zip(wcss, wcss[1:]))
    truth = {r["row"]: r["blob"] for r in read_csv(FIXTURES / "blobs_truth.csv")}
    found = {r["row"]: r["cluster"] for r in read_csv(tmp_path / "cluster" / "assignments.csv")}
    pairs = {(truth[k], found[k]) for k in truth}
    assert len(pairs) == 3


def test_classify_twice_is_byte_identical(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        code, _, err = run(capsys, "classify", "--config", CONFIG, "--train-ticker", "IBM",
                           "--test-ticker", "MSFT", "--seed", 7, "--out", tmp_path / name)
        assert code == 0, err
        outs.append(tmp_path / name / "classify")
    cmp = filecmp.dircmp(*outs)
    assert sorted(cmp.same_files) == sorted(p.name for p in outs[0].iterdir())
    assert (outs[0] / "roc.csv").exists()
    confusion = json.loads((outs[0] / "confusion.json").read_text())
    n_test = len(read_csv(outs[0] / "probabilities.csv"))
    assert sum(confusion[k] for k in ("tp", "fp", "tn", "fn")) == n_test


def test_manifest_records_hashes_and_params(tmp_path, capsys):
    code, _, err = run(capsys, "ingest", "--config", CONFIG, "--out", tmp_path)
    assert code == 0, err
    manifest = json.loads((tmp_path / "ingest" / "manifest.json").read_text())
    assert manifest["command"] == "ingest"
    assert set(manifest["outputs"]) == {"panel.csv"}
    assert "IBM.csv" in manifest["inputs"] and "macro/cpi.csv" in manifest["inputs"]
    assert manifest["params"]["tickers"] == ["IBM", "MSFT", "AAPL", "ADI", "ADP"]
    assert "output_dir" not in manifest["params"]


def test_rerun_from_manifest_params_reproduces_bytes(tmp_path, capsys):
    assert run(capsys, "cluster", "--config", CONFIG, "--out", tmp_path / "a")[0] == 0
    manifest = json.loads((tmp_path / "a" / "cluster" / "manifest.json").read_text())
    cfg = dict(manifest["params"], data_dir=str(FIXTURES))
    (tmp_path / "rerun.json").write_text(json.dumps(cfg))
    assert run(capsys, "cluster", "--config", tmp_path / "rerun.json", "--out", tmp_path / "b")[0] == 0
    again = json.loads((tmp_path / "b" / "cluster" / "manifest.json").read_text())
    assert again["outputs"] == manifest["outputs"]


def test_inputs_are_not_mutated(tmp_path, capsys):
    data = write_fixture_tree(tmp_path / "data")
    before = {p: p.read_bytes() for p in data.rglob("*") if p.is_file()}
    assert run(capsys, "label", "--config", data / "config.json", "--out", tmp_path / "out")[0] == 0
    assert {p: p.read_bytes() for p in data.rglob("*") if p.is_file()} == before


def test_flags_override_config(tmp_path, capsys):
    code, out, _ = run(capsys, "label", "--config", CONFIG, "--tickers", "ADI", "--out", tmp_path)
    assert code == 0
    assert json.loads(out)["summary"].keys() == {"ADI"}


@pytest.mark.parametrize("cmd", ["cluster", "classify", "backtest", "report"])
def test_seed_is_mandatory_for_random_commands(tmp_path, capsys, cmd):
    cfg = json.loads(CONFIG.read_text())
    del cfg["seed"]
    cfg["data_dir"] = str(FIXTURES)
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    code, _, err = run(capsys, cmd, "--config", tmp_path / "c.json", "--out", tmp_path / "o")
    assert code == 2
    assert json.loads(err)["exit_code"] == 2


def test_usage_error_is_one_json_line(capsys):
    code, _, err = run(capsys, "cluster", "--restarts", "many")
    assert code == 2
    assert len(err.strip().splitlines()) == 1
    assert json.loads(err)["error"] == "UsageError"


def test_missing_ticker_file_exits_3(tmp_path, capsys):
    code, _, err = run(capsys, "ingest", "--config", CONFIG, "--tickers", "NOPE", "--out", tmp_path)
    assert code == 3
    assert "NOPE" in json.loads(err)["message"]


def test_malformed_csv_reports_row_and_exits_3(tmp_path, capsys):
    (tmp_path / "BAD.csv").write_text(
        "date,open,high,low,close,adjusted_close,volume\n2020-01-02,1,1,1,1,1,10\n2020-01-03,x,1,1,1,1,10\n")
    code, _, err = run(capsys, "label", "--data-dir", tmp_path, "--ticker", "BAD", "--out", tmp_path / "o")
    assert code == 3
    assert "row 3" in json.loads(err)["message"]


def test_constant_feature_exits_4(tmp_path, capsys):
    data = write_fixture_tree(tmp_path / "data")
    (data / "macro" / "cpi.csv").write_text("date,value\n2014-01-01,5\n")
    code, _, err = run(capsys, "classify", "--config", data / "config.json", "--features", "volume,cpi",
                       "--out", tmp_path / "o")
    assert code == 4
    assert "cpi" in json.loads(err)["message"]


def test_collinear_features_name_the_column(tmp_path, capsys):
    code, _, err = run(capsys, "classify", "--config", CONFIG, "--features", "macd,macd_signal,macd_hist",
                       "--out", tmp_path)
    assert code == 4
    line = json.loads(err)
    assert line["error"] == "RankError" and "macd_hist" in line["message"]
