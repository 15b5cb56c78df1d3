import json
import subprocess
import sys

import pytest

RUN = [sys.executable, "-m", "netforge.cli"]


def run_cli(args, cwd, env):
    return subprocess.run(RUN + args, cwd=cwd, env=env,
                          capture_output=True, text=True)


def test_certify_polygon_center_k6(tmp_path, cache_env):
    out = tmp_path / "cert.json"
    r = run_cli(["certify", "--catalog", "polygon_center", "--k", "6",
                 "--out", str(out)], tmp_path, cache_env)
    assert r.returncode == 0, r.stderr
    cert = json.loads(out.read_text())
    assert cert["flexible"] is True
    assert cert["closable"] is False
    assert (tmp_path / "cert.json.manifest.json").exists()


def test_certify_nc(tmp_path, cache_env):
    r = run_cli(["certify", "--catalog", "N_C", "--a", "0.3", "--b", "0.5"],
                tmp_path, cache_env)
    assert r.returncode == 0
    cert = json.loads(r.stdout)
    assert cert["flexible"] is True and cert["closable"] is True
    assert cert["gap_ratio"] > 10


def test_certify_malformed_file_exits_64(tmp_path, cache_env):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    r = run_cli(["certify", "--network", str(bad)], tmp_path, cache_env)
    assert r.returncode == 64


def test_certify_unknown_catalog_exits_64(tmp_path, cache_env):
    r = run_cli(["certify", "--catalog", "bogus"], tmp_path, cache_env)
    assert r.returncode == 64


def test_bad_flag_exits_64(tmp_path, cache_env):
    r = run_cli(["certify", "--frobnicate"], tmp_path, cache_env)
    assert r.returncode == 64


def test_certify_disconnected_exits_1(tmp_path, cache_env):
    net = tmp_path / "net.json"
    net.write_text(json.dumps({
        "vertices": [{"id": "a", "x": 0, "y": 0}, {"id": "b", "x": 1, "y": 0},
                     {"id": "c", "x": 5, "y": 5}, {"id": "d", "x": 6, "y": 5}],
        "edges": [{"u": "a", "v": "b", "weight": 1.0},
                  {"u": "c", "v": "d", "weight": 1.0}]}))
    r = run_cli(["certify", "--network", str(net)], tmp_path, cache_env)
    assert r.returncode == 1


def test_configure_failing_assembly_exits_3(tmp_path, cache_env):
    r = run_cli(["configure", "--catalog", "n_v"], tmp_path, cache_env)
    assert r.returncode == 3
    assert "vi_ray_separation" in r.stderr


def test_configure_assemble_plot_pipeline(tmp_path, cache_env):
    cloud = tmp_path / "cloud.csv"
    r = run_cli(["configure", "--catalog", "n_c", "--ell", "10",
                 "--kappa", "64", "--out", str(cloud)], tmp_path, cache_env)
    assert r.returncode == 0, r.stderr
    assert cloud.exists()
    report = json.loads((tmp_path / "cloud.csv.report.json").read_text())
    assert report["band_violations"] == []
    assert report["degree_mismatches"] == []
    assert max(report["condition_residuals"].values()) < 1e-9

    diag = tmp_path / "diag.json"
    r2 = run_cli(["assemble", str(cloud), "--ell", "10",
                  "--windows", "anchors", "--out", str(diag)],
                 tmp_path, cache_env)
    assert r2.returncode == 0, r2.stderr
    obj = json.loads(diag.read_text())
    assert obj["gate"]["pass"] is True
    assert obj["norms"]["sup_max"] > 0

    svg = tmp_path / "cloud.svg"
    r3 = run_cli(["plot", str(cloud), "--out", str(svg)], tmp_path, cache_env)
    assert r3.returncode == 0
    assert "<circle" in svg.read_text()


def test_assemble_single_point_all_zero(tmp_path, cache_env):
    cloud = tmp_path / "one.csv"
    cloud.write_text("x,y,sign,provenance\n0,0,1,anchor:a:o\n")
    diag = tmp_path / "one.json"
    r = run_cli(["assemble", str(cloud), "--ell", "10", "--windows", "all",
                 "--out", str(diag)], tmp_path, cache_env)
    assert r.returncode == 0
    obj = json.loads(diag.read_text())
    assert obj["norms"]["sup_max"] == 0.0
    assert obj["points"][0]["projection"] == [0.0, 0.0] or \
        obj["points"][0]["projection"] == [-0.0, -0.0]


def test_assemble_is_deterministic(tmp_path, cache_env):
    cloud = tmp_path / "two.csv"
    cloud.write_text("x,y,sign,provenance\n"
                     "0,0,1,anchor:a:o\n10,0,1,anchor:b:o\n")
    d1, d2 = tmp_path / "d1.json", tmp_path / "d2.json"
    for d in (d1, d2):
        r = run_cli(["assemble", str(cloud), "--ell", "10",
                     "--windows", "all", "--out", str(d)],
                    tmp_path, cache_env)
        assert r.returncode == 0
    assert d1.read_bytes() == d2.read_bytes()


def test_plot_empty_cloud(tmp_path, cache_env):
    cloud = tmp_path / "empty.csv"
    cloud.write_text("x,y,sign,provenance\n")
    svg = tmp_path / "empty.svg"
    r = run_cli(["plot", str(cloud), "--out", str(svg)], tmp_path, cache_env)
    assert r.returncode == 0
    assert "<circle" not in svg.read_text()


def test_plot_field_heatmap(tmp_path, cache_env):
    field = tmp_path / "field.csv"
    lines = ["x,y,value"]
    for i in range(4):
        for j in range(4):
            lines.append(f"{i},{j},{(i - j) * 0.5}")
    field.write_text("\n".join(lines) + "\n")
    svg = tmp_path / "heat.svg"
    r = run_cli(["plot", str(field), "--out", str(svg)], tmp_path, cache_env)
    assert r.returncode == 0
    assert svg.read_text().count("<rect") > 16


def test_plot_unknown_header_exits_64(tmp_path, cache_env):
    bad = tmp_path / "bad.csv"
    bad.write_text("foo,bar\n1,2\n")
    r = run_cli(["plot", str(bad)], tmp_path, cache_env)
    assert r.returncode == 64


def test_manifest_contents(tmp_path, cache_env):
    cloud = tmp_path / "empty.csv"
    cloud.write_text("x,y,sign,provenance\n")
    svg = tmp_path / "p.svg"
    r = run_cli(["plot", str(cloud), "--out", str(svg)], tmp_path, cache_env)
    assert r.returncode == 0
    man = json.loads((tmp_path / "p.svg.manifest.json").read_text())
    assert man["command"] == "plot"
    assert man["outputs"] == [str(svg)]
    assert man["wall_time"] >= 0
    assert "version" in man
