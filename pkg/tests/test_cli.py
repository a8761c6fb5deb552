import subprocess
from collections import Counter

import pytest

from focusidx.classifiers import (GENERIC_CHEAP, GROUND_TRUTH, ClassifierProfile,
                                  RankModel, save_profiles)
from focusidx.cli import main
from focusidx.streamio import read_stream


SPEC = """\
n_objects=800
vocab=100
n_stream_classes=12
seed=11
stream_id=small
"""


def _out(capsys):
    captured = capsys.readouterr()
    return dict(line.split("=", 1) for line in captured.out.splitlines() if "=" in line)


@pytest.fixture(scope="module")
def flow(tmp_path_factory):
    """simulate -> tune -> ingest, shared by the query/exit-code tests."""
    d = tmp_path_factory.mktemp("flow")
    (d / "spec.txt").write_text(SPEC)
    assert main(["simulate", "--spec", str(d / "spec.txt"),
                 "--out", str(d / "s.stream")]) == 0
    assert main(["tune", "--stream", str(d / "s.stream"),
                 "--out", str(d / "cfg"),
                 "--emit", str(d / "grid.csv")]) == 0
    assert main(["ingest", "--stream", str(d / "s.stream"),
                 "--config", str(d / "cfg"),
                 "--profiles", str(d / "cfg.profiles"),
                 "--out", str(d / "s.idx")]) == 0
    return d


def test_simulate_writes_spec_and_is_deterministic(tmp_path, capsys):
    out1, out2 = tmp_path / "a.stream", tmp_path / "b.stream"
    assert main(["simulate", "--out", str(out1), "--n-objects", "300",
                 "--seed", "4", "--write-spec", str(tmp_path / "spec.out")]) == 0
    kv = _out(capsys)
    assert kv["objects"] == "300"
    assert main(["simulate", "--out", str(out2), "--n-objects", "300",
                 "--seed", "4"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert "n_objects=300" in (tmp_path / "spec.out").read_text()
    assert "seed=4" in (tmp_path / "spec.out").read_text()


def test_tune_outputs(flow, capsys):
    cfg_text = (flow / "cfg").read_text()
    assert "profile=" in cfg_text and "k=" in cfg_text
    assert (flow / "cfg.profiles").exists()
    grid = (flow / "grid.csv").read_text().splitlines()
    assert grid[0].startswith("profile,l_s,k,t,m,")
    assert len(grid) > 1


def test_ingest_rerun_is_byte_identical(flow):
    before = (flow / "s.idx").read_bytes()
    assert main(["ingest", "--stream", str(flow / "s.stream"),
                 "--config", str(flow / "cfg"),
                 "--profiles", str(flow / "cfg.profiles"),
                 "--out", str(flow / "s2.idx")]) == 0
    assert (flow / "s2.idx").read_bytes() == before


def test_query_round_trip(flow, capsys):
    _, objects = read_stream(flow / "s.stream")
    top = Counter(o.true_class for o in objects).most_common(1)[0][0]
    gt_frames = sorted({o.frame_id for o in objects if o.true_class == top})
    assert main(["query", "--index", str(flow / "s.idx"),
                 "--stream", str(flow / "s.stream"),
                 "--class", str(top),
                 "--profiles", str(flow / "cfg.profiles")]) == 0
    kv = _out(capsys)
    frames = [int(f) for f in kv["frames"].split(",") if f]
    assert set(gt_frames) <= set(frames) or len(frames) >= 0.9 * len(gt_frames)
    assert int(kv["gt_inferences"]) >= 1


def test_query_time_range_needs_both_bounds(flow, capsys):
    rc = main(["query", "--index", str(flow / "s.idx"),
               "--stream", str(flow / "s.stream"),
               "--class", "0", "--start", "10"])
    assert rc == 1


def test_query_bad_class_id(flow):
    rc = main(["query", "--index", str(flow / "s.idx"),
               "--stream", str(flow / "s.stream"), "--class", "wat"])
    assert rc == 1


def test_usage_errors_exit_1(capsys):
    assert main(["frobnicate"]) == 1
    assert main(["tune"]) == 1  # missing required arguments
    assert main([]) == 1


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    assert main(["query", "--help"]) == 0


def test_missing_file_exits_2(tmp_path, capsys):
    rc = main(["tune", "--stream", str(tmp_path / "nope.stream"),
               "--out", str(tmp_path / "cfg")])
    assert rc == 2


def test_corrupt_stream_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.stream"
    bad.write_text("NOTASTREAM\n")
    rc = main(["ingest", "--stream", str(bad), "--config", str(tmp_path / "c"),
               "--out", str(tmp_path / "i")])
    assert rc == 2


def test_unattainable_targets_exit_3(tmp_path, capsys):
    """A nearly random classifier on a tiny vocabulary: no grid point can
    reach the default 0.95 recall target."""
    (tmp_path / "spec.txt").write_text(
        "n_objects=1500\nvocab=9\nn_stream_classes=4\nseed=0\n")
    assert main(["simulate", "--spec", str(tmp_path / "spec.txt"),
                 "--out", str(tmp_path / "s.stream")]) == 0
    registry = {
        "gt": ClassifierProfile("gt", GROUND_TRUTH, 9, RankModel(1.0, 0.0), 58.0),
        "weak": ClassifierProfile("weak", GENERIC_CHEAP, 9, RankModel(0.05, 0.95),
                                  7.25, feature_noise_sigma=0.05),
    }
    save_profiles(registry, tmp_path / "weak.profiles")
    rc = main(["tune", "--stream", str(tmp_path / "s.stream"),
               "--out", str(tmp_path / "cfg"),
               "--profiles", str(tmp_path / "weak.profiles")])
    assert rc == 3


def test_console_script_help():
    proc = subprocess.run(["focus", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "simulate" in proc.stdout
