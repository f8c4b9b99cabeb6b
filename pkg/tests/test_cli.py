import json

import pytest

from twistorcount import enumeration
from twistorcount.cli import EXIT_CONFIG, EXIT_CONSISTENCY, EXIT_OK, EXIT_PRECONDITION, main


def run(tmp_path, name, *args):
    out = tmp_path / name
    return main([*args, "--output-dir", str(out)]), out


def test_count_axis_plane_row(tmp_path):
    rc, out = run(tmp_path, "c", "count", "--lattice", "diagonal:2,3", "--axis-plane", "--V", "1")
    assert rc == EXIT_OK
    lines = (out / "counts.csv").read_text().splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[2].startswith("1,24,")
    summary = json.loads((out / "counts.json").read_text())
    assert summary["counts"] == [24] and summary["paper_delta"] == "4/697633"
    assert summary["config"]["lattice"] == {"kind": "diagonal", "p": 2, "q": 3}


def test_oracle_check_suite_passes(tmp_path):
    rc, out = run(tmp_path, "o", "oracle-check", "--thresholds", "1,2,3")
    assert rc == EXIT_OK
    data = json.loads((out / "oracle.json").read_text())
    assert data["mismatches"] == 0 and all(c["match"] for c in data["cases"])


def test_oracle_mismatch_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(enumeration, "brute_force_oracle", lambda lat, plane, V: [])
    rc, out = run(tmp_path, "o", "oracle-check", "--lattice", "diagonal:2,3", "--axis-plane", "--V", "1")
    assert rc == EXIT_CONSISTENCY
    assert json.loads((out / "oracle.json").read_text())["mismatches"] == 1


def test_malformed_basis_is_config_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lattice": {"kind": "diagonal", "p": 2, "q": 3},
                               "plane": {"basis": [[1, 0, 0, 0, "x"], [0, 1, 0, 0, 0]]}}))
    rc, out = run(tmp_path, "bad", "enumerate", "--config", str(cfg))
    assert rc == EXIT_CONFIG and not out.exists()


@pytest.mark.parametrize("args", [
    ["count", "--thresholds", "2,1"],
    ["count", "--lattice", "torus"],
    ["count", "--workers", "0"],
    ["orbit"],
    ["count", "--no-such-flag"],
])
def test_other_config_errors(tmp_path, args):
    rc, out = run(tmp_path, "bad", *args)
    assert rc == EXIT_CONFIG and not out.exists()


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lattic": {"kind": "k3"}}))
    rc, out = run(tmp_path, "bad", "count", "--config", str(cfg))
    assert rc == EXIT_CONFIG and not out.exists()


def test_precondition_failures(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lattice": {"kind": "diagonal", "p": 2, "q": 3},
                               "plane": {"basis": [[0, 0, 1, 0, 0], [1, 0, 0, 0, 0]]}}))
    rc, out = run(tmp_path, "np", "enumerate", "--config", str(cfg))
    assert rc == EXIT_PRECONDITION and not out.exists()
    vec = ",".join(["1", "1"] + ["0"] * 20)
    rc, out = run(tmp_path, "ni", "orbit", "--vector", vec)
    assert rc == EXIT_PRECONDITION and not out.exists()


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lattice": {"kind": "diagonal", "p": 2, "q": 3}, "plane": {"axis": True},
                               "thresholds": ["1", "2"], "limit": 50}))
    rc, out = run(tmp_path, "e", "enumerate", "--config", str(cfg), "--limit", "5")
    assert rc == EXIT_OK
    lines = (out / "records.csv").read_text().splitlines()
    assert len(lines) == 2 + 5
    meta = json.loads((out / "records.jsonl").read_text().splitlines()[0])
    assert meta["count"] == 72 and meta["config"]["limit"] == 5


def test_outputs_independent_of_workers(tmp_path):
    common = ["--thresholds", "6/5,7/5", "--plane-seed", "7"]
    for sub in ("enumerate", "count", "equidist", "report"):
        rc1, a = run(tmp_path, f"{sub}1", sub, *common, "--workers", "1", "--genericity-bound", "1")
        rc2, b = run(tmp_path, f"{sub}3", sub, *common, "--workers", "3", "--genericity-bound", "1")
        assert rc1 == rc2 == EXIT_OK
        names = sorted(p.name for p in a.iterdir())
        assert names == sorted(p.name for p in b.iterdir())
        for name in names:
            assert (a / name).read_bytes() == (b / name).read_bytes()


def test_exact_outputs_byte_reproducible(tmp_path):
    args = ["count", "--lattice", "diagonal:2,3", "--thresholds", "1,2,3,4"]
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"plane": {"random_exact": 5}}))
    rc1, a = run(tmp_path, "a", *args, "--config", str(cfg))
    rc2, b = run(tmp_path, "b", *args, "--config", str(cfg))
    assert rc1 == rc2 == EXIT_OK
    for name in ("counts.csv", "counts.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_orbit_and_constant_and_weights(tmp_path):
    rc, out = run(tmp_path, "orb", "orbit", "--V", "6/5", "--plane-seed", "7", "--orbit-sample", "3")
    assert rc == EXIT_OK
    data = json.loads((out / "orbit.json").read_text())
    assert len(data["vectors"]) == 3
    assert all(v["complement_inertia"] == [2, 0, 18] for v in data["vectors"])

    rc, out = run(tmp_path, "const", "constant", "--prime-cutoff", "500", "--thresholds", "1.2,1.3,1.4",
                  "--plane-seed", "7")
    assert rc == EXIT_OK
    rep = json.loads((out / "constant.json").read_text())
    assert rep["prime_cutoff"] == 500 and rep["fitted_constant"] > 0

    rc, out = run(tmp_path, "w", "count", "--V", "6/5", "--plane-seed", "7", "--weight", "0,0,1", "--weight", "2,1,0.5")
    assert rc == EXIT_OK
    row = json.loads((out / "counts.json").read_text())["weighted_counts"][0]
    assert row["N_times_integral"] == json.loads((out / "counts.json").read_text())["counts"][0]
