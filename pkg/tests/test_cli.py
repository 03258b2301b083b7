import argparse
import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from hyperlattice.cli import (EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main, parse_complex,
                              parse_h_list)


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


@pytest.mark.parametrize("text,value", [
    ("-2.95", -2.95), ("3", 3.0), ("-2.5+0.1i", -2.5 + 0.1j), ("1e-3-2E2i", 1e-3 - 200j),
    ("0.1i", 0.1j), ("-.5i", -0.5j), ("+4.", 4.0),
])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "i", "-i", "1+i", "1 + 2i", "2j", "1+2", "a+bi", "1e"])
def test_parse_complex_rejects(text):
    with pytest.raises(argparse.ArgumentTypeError):
        parse_complex(text)


def test_parse_h_list():
    assert parse_h_list("0.2,0.1, 0.05") == [0.2, 0.1, 0.05]
    for bad in ("", ",", "0.1,x"):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_h_list(bad)


def test_generate_summary(capsys, tmp_path):
    edges = tmp_path / "e.csv"
    rc, out, _ = run(capsys, "generate", "--p", "7", "--rings", "3", "--out",
                     str(tmp_path / "c.txt"), "--edges", str(edges))
    assert rc == EXIT_OK
    assert "N=112" in out and "L=0.894" in out
    assert len((tmp_path / "c.txt").read_text().splitlines()) == 112
    assert edges.exists()


def test_generate_stdout(capsys):
    rc, out, err = run(capsys, "generate", "--p", "7", "--rings", "2", "--out", "-")
    assert rc == EXIT_OK
    lines = out.splitlines()
    assert len(lines) == 35
    x, y = map(float, lines[0].split())
    assert abs(complex(x, y)) < 1
    assert "N=35" in err


@pytest.mark.parametrize("argv", [
    ["generate", "--p", "7", "--rings", "0"],
    ["generate", "--p", "6", "--rings", "2"],
    ["generate"],
    ["spectrum", "--rings", "11", "--mode", "continuum"],
    ["spectrum", "--rings", "3", "--levels", "0"],
    ["green", "--omega", "1+i"],
    ["scan-h", "--h", ""],
    ["scan-h", "--h", "0.3,0.1"],
    ["nonsense"],
])
def test_usage_errors(capsys, argv):
    rc, _, err = run(capsys, *argv)
    assert rc == EXIT_USAGE
    assert err


def test_spectrum_both(capsys):
    rc, out, _ = run(capsys, "spectrum", "--rings", "4", "--mode", "both", "--levels", "2")
    assert rc == EXIT_OK
    rec = json.loads(out)
    assert rec["graph"][0] == pytest.approx(-2.847, abs=1e-3)
    assert rec["continuum"][0] == pytest.approx(-2.842, abs=1e-3)
    assert rec["difference"][0] == pytest.approx(rec["graph"][0] - rec["continuum"][0])


def test_spectrum_seven_cycle(capsys):
    rc, out, _ = run(capsys, "spectrum", "--rings", "1", "--mode", "graph")
    assert rc == EXIT_OK
    assert json.loads(out)["graph"][0] == pytest.approx(-2.0, abs=1e-12)


def test_spectrum_asymptotic(capsys):
    rc, out, _ = run(capsys, "spectrum", "--rings", "10", "--mode", "continuum", "--asymptotic")
    assert rc == EXIT_OK
    rec = json.loads(out)
    assert rec["continuum"][0] == pytest.approx(-2.924, abs=1e-3)
    assert rec["asymptotic"][0] == pytest.approx(-2.924, abs=1e-3)


def _read_bins(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_green_pipeline(capsys, tmp_path):
    dump = tmp_path / "dump.csv"
    rc, out, _ = run(capsys, "green", "--rings", "3", "--omega", "-2.95", "--dump", str(dump))
    assert rc == EXIT_OK
    rows = _read_bins(out.split("source=")[0])
    assert len(rows) == 30
    assert dump.read_text().count("\n") > 100


def test_green_complex_and_stdout(capsys):
    rc, out, err = run(capsys, "green", "--rings", "3", "--omega", "-2.5+0.1i", "--out", "-")
    assert rc == EXIT_OK
    assert len(_read_bins(out)) == 30
    assert "bins_within_std=" in err


def test_green_on_spectrum_exit_code(capsys):
    # -2 is an eigenvalue of the 7-cycle
    rc, _, err = run(capsys, "green", "--rings", "1", "--source", "0", "--omega", "-2")
    assert rc == EXIT_NUMERIC
    assert "-2" in err


def test_scan_h(capsys):
    rc, out, _ = run(capsys, "scan-h", "--rings", "4", "--h", "0.275798,0.1,0.05,0.02")
    assert rc == EXIT_OK
    head, *rows = out.strip().splitlines()[:-1]
    assert head == "h,resid_quadratic,resid_cubic"
    assert len(rows) == 4
    slopes = dict(kv.split("=") for kv in out.strip().splitlines()[-1].split())
    assert float(slopes["slope_quadratic"]) >= 2.8
    assert float(slopes["slope_cubic"]) >= 3.8


def test_scan_h_physical_value_identity(capsys):
    from hyperlattice import generate_lattice
    from hyperlattice.continuum_ops import adjacency_action, apply_Ah, radial_cosine_function
    lat = generate_lattice(7, 4)
    f = radial_cosine_function()
    resid = apply_Ah(f, lat, lat.h, lat.interior) - adjacency_action(f, lat, lat.interior)
    assert np.max(np.abs(resid)) <= 1e-12
    rc, out, _ = run(capsys, "scan-h", "--rings", "4", "--h", repr(lat.h))
    assert rc == EXIT_OK
    assert "not fitted" in out


def test_outputs_round_trip(capsys):
    rc, out, _ = run(capsys, "generate", "--rings", "2", "--out", "-")
    from hyperlattice import generate_lattice
    sites = generate_lattice(7, 2).sites
    parsed = np.array([complex(*map(float, ln.split())) for ln in out.splitlines()])
    assert np.array_equal(parsed, sites)


@pytest.mark.parametrize("argv", [
    ["generate", "--rings", "3"],
    ["spectrum", "--rings", "3", "--mode", "both"],
    ["green", "--rings", "3", "--omega", "-2.95"],
    ["scan-h", "--rings", "3", "--h", "0.2,0.1,0.05,0.02"],
])
def test_deterministic_files(tmp_path, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--out", str(a)]) == EXIT_OK
    assert main(argv + ["--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hyperlattice.cli", "generate", "--rings", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE
