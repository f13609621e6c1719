import json

import pytest

from orbitlab.cli import main


def run(tmp_path, cfg, *extra, command="analyze"):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg) if isinstance(cfg, dict) else cfg)
    return main([command, "--config", str(path), "--out", str(tmp_path / "out"), *extra])


def test_decompose_identity(tmp_path):
    assert run(tmp_path, {"operator": {"kind": "matrix", "entries": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}}, command="decompose") == 0
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["split"]["doubly_power_bounded"] is True


def test_decompose_jordan_exit_2(tmp_path):
    cfg = {"operator": {"kind": "matrix", "entries": [[[1, 0], [1, 0]], [[0, 0], [1, 0]]]}}
    assert run(tmp_path, cfg, command="decompose") == 2


def test_config_errors_exit_1(tmp_path, capsys):
    assert run(tmp_path, {"operator": {"kind": "matrix", "entries": [[[1, 0]]]}, "bogus": 1}) == 1
    assert run(tmp_path, "{not json") == 1
    with pytest.raises(SystemExit) as info:
        main(["nonsense", "--config", "x"])
    assert info.value.code == 1


def test_analyze_outputs(tmp_path):
    cfg = {"operator": {"kind": "diagonal", "rule": "dyadic"}, "vector": {"kind": "ones"},
           "analysis": {"eps_grid": [1, 0.5], "horizons": [64, 128, 256, 512], "K_min": 16}}
    assert run(tmp_path, cfg, "--target", "diff", "--m", "1") == 0
    out = tmp_path / "out"
    v = json.loads((out / "verdict.json").read_text())
    assert v["verdict"] == "COMPACT_CERTIFIED"
    assert (out / "entropy.csv").read_text().startswith("eps,horizon,net_size,flag\n")
    assert (out / "packing.csv").read_text().startswith("k,witness_index,min_pairwise_distance\n")


def test_witness_exit_codes(tmp_path):
    assert run(tmp_path, {"operator": {"kind": "diagonal", "rule": "dyadic"}, "vector": {"kind": "ones"},
                          "analysis": {"horizons": [64, 128, 256, 512, 1024]},
                          "witness": {"horizon": 16}}, command="witness") == 5
    assert json.loads((tmp_path / "out" / "certificate.json").read_text())["status"] == "EXHAUSTED"
    assert run(tmp_path, {"operator": {"kind": "example1"}}, command="witness") == 4


def test_gallery_bad_m(tmp_path):
    assert run(tmp_path, {"gallery": {"id": "mth-root"}}, "--m", "1", command="gallery") == 1


@pytest.mark.parametrize("name", ["telescoping", "multap", "pbig"])
def test_lemmas(tmp_path, name):
    assert run(tmp_path, {"lemma": {"name": name, "trials": 8}}, "--seed", "7", command="lemma") == 0
    assert json.loads((tmp_path / "out" / "results.json").read_text())["all_ok"] is True


def test_seed_range(tmp_path):
    assert run(tmp_path, {"lemma": {"name": "telescoping", "trials": 1}}, "--seed", str(2**64), command="lemma") == 1
