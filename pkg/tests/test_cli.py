import json
import os

import pytest

from thermocc.cli import main
from thermocc.manifest import read_manifest, resolve
from thermocc.synth import DatasetSpec, generate_dataset, occupied_count


def tree_bytes(root):
    out = {}
    for dirpath, _, names in os.walk(root):
        for name in names:
            full = os.path.join(dirpath, name)
            out[os.path.relpath(full, root)] = open(full, "rb").read()
    return out


@pytest.fixture
def frontal_dataset(tmp_path):
    """A small all-easy dataset the detector scores perfectly."""
    out = tmp_path / "data"
    rc = main(["synth", "--out", str(out), "--frames", "24", "--seed", "5",
               "--scenario", "frontal"])
    assert rc == 0
    return str(out / "manifest.jsonl")


def test_synth_writes_dataset(tmp_path, capsys):
    out = tmp_path / "ds"
    rc = main(["synth", "--out", str(out), "--frames", "40", "--seed", "1"])
    assert rc == 0
    records = read_manifest(str(out / "manifest.jsonl"))
    assert len(records) == 40
    occupied = sum(r.occupied for r in records)
    assert occupied == occupied_count(40, 3.75 / 4.75)
    assert f"wrote 40 frames ({occupied} occupied" in capsys.readouterr().out


def test_split_writes_subsets(tmp_path, frontal_dataset):
    out = tmp_path / "splits"
    rc = main(["split", "--manifest", frontal_dataset, "--out", str(out),
               "--seed", "0"])
    assert rc == 0
    total = 0
    for name in ("train", "val", "test"):
        subset_path = str(out / f"{name}.jsonl")
        records = read_manifest(subset_path)
        total += len(records)
        for rec in records:
            assert os.path.exists(resolve(subset_path, rec.frame))
            assert os.path.exists(resolve(subset_path, rec.labels))
    assert total == 24
    report = json.loads((out / "ratio_report.json").read_text())
    assert set(report) == {"overall", "subsets"}
    assert report["overall"]["total"] == 24
    assert set(report["subsets"]) == {"train", "val", "test"}


def test_detect_writes_predictions(tmp_path, frontal_dataset):
    preds = tmp_path / "preds"
    rc = main(["detect", "--manifest", frontal_dataset, "--out", str(preds)])
    assert rc == 0
    records = read_manifest(frontal_dataset)
    for rec in records:
        stem = os.path.splitext(os.path.basename(rec.frame))[0]
        text = (preds / f"{stem}.txt").read_text()
        if rec.occupied:
            fields = text.splitlines()[0].split()
            assert len(fields) == 6
            assert float(fields[5]) >= 0.9
        else:
            assert text == ""


def test_eval_report(tmp_path, frontal_dataset, capsys):
    preds = tmp_path / "preds"
    main(["detect", "--manifest", frontal_dataset, "--out", str(preds)])
    report_path = tmp_path / "report.json"
    rc = main(["eval", "--manifest", frontal_dataset, "--preds", str(preds),
               "--out", str(report_path)])
    assert rc == 0
    report = json.loads(report_path.read_text())
    assert list(report) == ["precision", "recall", "map50", "map50_95",
                            "ap_per_iou", "counts", "operating_tau"]
    assert report["precision"] == 1.0
    assert report["recall"] == 1.0
    assert report["counts"]["images"] == 24
    assert "precision 1.000" in capsys.readouterr().out


def test_occupancy_outputs(tmp_path, frontal_dataset, capsys):
    preds = tmp_path / "preds"
    main(["detect", "--manifest", frontal_dataset, "--out", str(preds)])
    out = tmp_path / "occ"
    rc = main(["occupancy", "--manifest", frontal_dataset,
               "--preds", str(preds), "--out", str(out)])
    assert rc == 0
    timeline = (out / "timeline.csv").read_text()
    assert timeline.startswith("ts,actual,detected\n")
    assert len(timeline.splitlines()) == 25
    schedule = (out / "schedule.csv").read_text()
    assert schedule.startswith("ts,hvac_on\n")
    assert (out / "occupancy_timeline.svg").read_text().startswith("<svg ")
    assert "recall 1.000" in capsys.readouterr().out


def test_pipeline_reproducible(tmp_path):
    args = ["pipeline", "--frames", "120", "--seed", "9"]
    rc = main(args + ["--out", str(tmp_path / "a"), "--threads", "1"])
    assert rc == 0
    rc = main(args + ["--out", str(tmp_path / "b"), "--threads", "2"])
    assert rc == 0
    a = tree_bytes(str(tmp_path / "a"))
    b = tree_bytes(str(tmp_path / "b"))
    assert sorted(a) == sorted(b)
    assert a == b
    assert "report.json" in a
    assert os.path.join("plots", "pr_curve.svg") in a
    assert os.path.join("occupancy", "schedule.csv") in a


def test_exit_codes(tmp_path):
    assert main([]) == 1  # a subcommand is required
    assert main(["synth", "--bogus"]) == 1
    assert main(["--help"]) == 0
    assert main(["split", "--manifest", str(tmp_path / "missing.jsonl"),
                 "--out", str(tmp_path / "s")]) == 1
    assert main(["detect", "--manifest", str(tmp_path / "missing.jsonl"),
                 "--out", str(tmp_path / "p")]) == 1


def test_bad_fractions_fail_cleanly(tmp_path, frontal_dataset):
    out = str(tmp_path / "splits")
    assert main(["split", "--manifest", frontal_dataset, "--out", out,
                 "--fractions", "0.5,0.5"]) == 1
    assert main(["split", "--manifest", frontal_dataset, "--out", out,
                 "--fractions", "0.5,0.4,0.3"]) == 1


def test_bad_tau_fails_cleanly(tmp_path, frontal_dataset):
    preds = tmp_path / "preds"
    main(["detect", "--manifest", frontal_dataset, "--out", str(preds)])
    assert main(["eval", "--manifest", frontal_dataset,
                 "--preds", str(preds), "--tau", "1.5"]) == 1


def test_bad_threads_fails_cleanly(tmp_path, frontal_dataset):
    assert main(["detect", "--manifest", frontal_dataset,
                 "--out", str(tmp_path / "p"), "--threads", "0"]) == 1


def test_env_seed_overrides_flag(tmp_path, monkeypatch):
    monkeypatch.setenv("THERMOCC_SEED", "7")
    main(["synth", "--out", str(tmp_path / "a"), "--frames", "15",
          "--seed", "1"])
    main(["synth", "--out", str(tmp_path / "b"), "--frames", "15",
          "--seed", "2"])
    monkeypatch.delenv("THERMOCC_SEED")
    main(["synth", "--out", str(tmp_path / "c"), "--frames", "15",
          "--seed", "7"])
    a = tree_bytes(str(tmp_path / "a"))
    assert a == tree_bytes(str(tmp_path / "b"))
    assert a == tree_bytes(str(tmp_path / "c"))


def test_env_seed_invalid(tmp_path, monkeypatch):
    monkeypatch.setenv("THERMOCC_SEED", "lots")
    assert main(["synth", "--out", str(tmp_path / "x"),
                 "--frames", "5"]) == 1
