import csv
import json

import pytest

from truthy.cli import ExitStatus, run
from truthy.features import FEATURE_NAMES
from truthy.records import load_stream


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    d = tmp_path_factory.mktemp("pipe")
    spec = d / "campaigns.json"
    spec.write_text(json.dumps([{"total_tweets": 120, "duration_s": 1800}, {"n_injectors": 3, "total_tweets": 60}]))
    paths = {k: d / v for k, v in dict(s="s.jsonl", l="l.csv", f="f.csv", m="m.json", v="v.json").items()}
    assert run(["simulate", "--organic", "15", "--campaigns", str(spec), "--seed", "4",
                "--out", str(paths["s"]), "--labels", str(paths["l"])]) == 0
    assert run(["features", "--in", str(paths["s"]), "--out", str(paths["f"])]) == 0
    assert run(["train", "--features", str(paths["f"]), "--labels", str(paths["l"]), "--out", str(paths["m"])]) == 0
    assert run(["detect", "--features", str(paths["f"]), "--out", str(paths["v"])]) == 0
    return paths


def test_simulate_writes_valid_jsonl(tmp_path):
    out = tmp_path / "s.jsonl"
    assert run(["simulate", "--organic", "0", "--seed", "1", "--out", str(out)]) == 0
    records, report = load_stream(out)
    assert report.n_rejected == 0 and report.n_records == len(records) > 0


def test_labels_file(pipeline):
    rows = list(csv.DictReader(pipeline["l"].open()))
    assert len(rows) == 17
    assert sum(r["label"] == "truthy" for r in rows) == 2


def test_features_csv_layout(pipeline):
    rows = list(csv.reader(pipeline["f"].open()))
    assert rows[0] == ["meme_kind", "meme_key", *FEATURE_NAMES]
    assert all(len(r) == 15 for r in rows)
    for r in rows[1:]:
        for x in r[2:]:
            digits = x.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
            assert len(digits) <= 9


def test_detect_output_sorted(pipeline):
    verdicts = json.loads(pipeline["v"].read_text())
    scores = [v["score"] for v in verdicts]
    assert scores == sorted(scores, reverse=True)
    assert set(verdicts[0]) == {"meme_kind", "meme_key", "score", "label", "contributions"}
    assert list(verdicts[0]["contributions"]) == sorted(FEATURE_NAMES)


def test_detect_with_model(pipeline, tmp_path):
    out = tmp_path / "v.json"
    assert run(["detect", "--features", str(pipeline["f"]), "--model", str(pipeline["m"]), "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())) == len(json.loads(pipeline["v"].read_text()))


def test_extract(pipeline, tmp_path, capsys):
    out = tmp_path / "e.csv"
    assert run(["extract", "--in", str(pipeline["s"]), "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["meme_kind", "meme_key", "n_tweets", "first_ts", "last_ts"]
    counts = [int(r[2]) for r in rows[1:]]
    assert counts == sorted(counts, reverse=True)
    assert run(["extract", "--in", str(pipeline["s"])]) == 0
    assert capsys.readouterr().out == out.read_text()


def test_graph(pipeline, tmp_path):
    out = tmp_path / "g.dot"
    assert run(["graph", "--in", str(pipeline["s"]), "--kind", "url",
                "--key", "HTTP://campaign0.example.org/story", "--dot", str(out)]) == 0
    text = out.read_text()
    assert text.startswith('digraph "http://campaign0.example.org/story"') and "->" in text
    assert run(["graph", "--in", str(pipeline["s"]), "--kind", "hashtag", "--key", "#nope",
                "--dot", str(out)]) == ExitStatus.INPUT


def test_exit_codes(tmp_path, capsys):
    assert run(["detect", "--features", str(tmp_path / "missing.csv")]) == ExitStatus.INPUT
    assert run(["unknown-subcommand"]) == ExitStatus.USAGE
    assert "usage" in capsys.readouterr().err
    assert run([]) == ExitStatus.USAGE
    assert run(["simulate", "--organic", "x", "--out", "o"]) == ExitStatus.USAGE
    for sub in ("simulate", "extract", "graph", "features", "train", "detect"):
        assert run([sub, "--help"]) == ExitStatus.OK
    assert run(["--help"]) == ExitStatus.OK


def test_bad_inputs(tmp_path, pipeline):
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,header\n")
    assert run(["detect", "--features", str(bad)]) == ExitStatus.INPUT
    spec = tmp_path / "c.json"
    spec.write_text('[{"n_injectors": 0}]')
    assert run(["simulate", "--organic", "1", "--campaigns", str(spec), "--out", str(tmp_path / "o")]) == 2
    spec.write_text('[{"bogus_field": 1}]')
    assert run(["simulate", "--organic", "1", "--campaigns", str(spec), "--out", str(tmp_path / "o")]) == 2
    labels = tmp_path / "l.csv"
    labels.write_text("meme_kind,meme_key,label\n")
    assert run(["train", "--features", str(pipeline["f"]), "--labels", str(labels),
                "--out", str(tmp_path / "m")]) == ExitStatus.INPUT


def test_writes_only_named_paths(tmp_path):
    before = set(tmp_path.iterdir())
    out = tmp_path / "s.jsonl"
    assert run(["simulate", "--organic", "2", "--seed", "1", "--out", str(out)]) == 0
    assert set(tmp_path.iterdir()) - before == {out}
