from __future__ import annotations

import json
import subprocess
import sys

import pytest

from tensorcomplex import cli


def run(*args):
    return cli.main([str(a) for a in args])


@pytest.fixture(scope="module")
def annulus_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("ann")
    dom, gens, fld = d / "a.tdom", d / "a.tchn", d / "v.tfld"
    assert run("domain", "build", "--dims", 96, 96, "--lo=-2,-2", "--hi", "2,2", "--chart", "cartesian2",
               "--mask", "annulus", "--param", "r_in=0.5", "--param", "r_out=1.8", "--out", dom,
               "--generators", gens, "--segments", 1024) == 0
    assert run("field", "sample", "--domain", dom, "--catalog", "vortex", "--out", fld) == 0
    return dom, gens, fld


def test_vortex_check_exits_incompatible(annulus_files, tmp_path):
    dom, gens, fld = annulus_files
    out = tmp_path / "r.json"
    code = run("compat", "check", "--kind", "grad2d", "--field", fld, "--domain", dom, "--chains", gens,
               "--out", out)
    assert code == 2
    rep = json.loads(out.read_text())
    assert rep["report"]["verdict"] == "incompatible"
    assert rep["tool"] == "tensorcomplex" and set(rep["input_digests"]) >= {str(fld), str(gens)}


def test_missing_chains_exit_inconclusive(annulus_files, tmp_path):
    dom, gens, fld = annulus_files
    assert run("compat", "check", "--kind", "grad2d", "--field", fld, "--out", tmp_path / "r.json") == 3


def test_compatible_field_exits_zero(annulus_files, tmp_path):
    dom, gens, _ = annulus_files
    fld = tmp_path / "c.tfld"
    assert run("field", "sample", "--domain", dom, "--valence", "tensor20", "--expr", "11=1", "--expr", "12=x*0",
               "--expr", "21=2", "--expr", "22=0", "--out", fld) == 0
    assert run("compat", "check", "--kind", "grad2d", "--field", fld, "--chains", gens,
               "--out", tmp_path / "r.json") == 0


def test_cohomology_of_torus(tmp_path, capsys):
    dom = tmp_path / "t.tdom"
    assert run("domain", "build", "--dims", 32, 32, 32, "--lo=-2,-2,-2", "--hi", "2,2,2", "--chart", "cartesian3",
               "--mask", "solid-torus", "--param", "R=1.2", "--param", "r=0.55", "--out", dom) == 0
    assert run("cohomology", "--domain", dom, "--complex", "elasticity3d") == 0
    res = json.loads(capsys.readouterr().out)
    assert res["betti"] == [1, 1, 0]
    assert res["H1"] == 6 and res["H2"] == 0


def test_verify_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("verify-complex", "--complex", "gc", "--seed", 3, "--probes", 2, "--out", a) == 0
    assert run("verify-complex", "--complex", "gc", "--seed", 3, "--probes", 2, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    csv_out = tmp_path / "a.csv"
    assert run("report", "render", "--report", a, "--out", csv_out) == 0
    lines = csv_out.read_text().splitlines()
    assert lines[0] == "complex,kind,part,item,probe,residual"
    assert len(lines) == 1 + 2 * 1 + 2 * 2


def test_potential_round_trip(tmp_path):
    dom, fld, out = tmp_path / "b.tdom", tmp_path / "g.tfld", tmp_path / "y.tfld"
    assert run("domain", "build", "--dims", 17, 17, "--lo", "0,0", "--hi", "1,1", "--chart", "cartesian2",
               "--out", dom) == 0
    assert run("field", "sample", "--domain", dom, "--valence", "tensor20", "--expr", "11=2", "--expr", "12=1",
               "--expr", "21=0", "--expr", "22=-1", "--out", fld) == 0
    assert run("potential", "reconstruct", "--kind", "grad", "--field", fld, "--base", "0,0", "--out", out) == 0
    Y = json.loads(out.read_text())
    assert Y["valence"] == "vector(2)"
    last = Y["components"]["1"][-1]
    assert last == pytest.approx(3.0)


@pytest.mark.parametrize("argv", [
    ["compat", "check", "--kind", "grad2d", "--field", "/nonexistent.tfld"],
    ["frobnicate"],
    ["compat"],
    ["verify-complex", "--complex", "gc"],
])
def test_errors_exit_one_with_json(argv, capsys):
    assert cli.main(argv) == 1
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert set(err) == {"error", "message"}


def test_bad_thread_setting(monkeypatch, capsys):
    monkeypatch.setenv("TC_THREADS", "zero")
    assert cli.main(["verify-complex", "--complex", "gc", "--seed", "0"]) == 1
    assert "TC_THREADS" in capsys.readouterr().err


def test_failed_write_leaves_no_partial_file(tmp_path, monkeypatch):
    from tensorcomplex import _io

    target = tmp_path / "x.json"
    target.write_text("old")
    monkeypatch.setattr(_io.os, "replace", lambda *a: (_ for _ in ()).throw(OSError("disk full")))
    with pytest.raises(OSError):
        _io.atomic_write(target, "new contents")
    assert target.read_text() == "old"
    assert [p.name for p in tmp_path.iterdir()] == ["x.json"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tensorcomplex", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "tensorcomplex" in proc.stdout
