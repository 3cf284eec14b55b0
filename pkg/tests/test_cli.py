"""End-to-end exercises of the command-line interface.

Everything runs in-process through ``main(argv)`` so exit codes, stdout,
stderr, and emitted files are all observable without subprocesses. The
golden-file test pins the exact bytes of a small ensemble sweep; if an
intentional change shifts numbers, regenerate tests/data/golden_sweep.csv
with the command quoted inside the test.
"""
import json
import math
from pathlib import Path

import numpy as np
import pytest

from mimome import __version__
from mimome.allocate import SecrecyProblem, SolverConfig
from mimome.channels import (
    ChannelPair,
    load_matrix,
    matrix_from_json,
    matrix_to_json,
    save_matrix,
)
from mimome.cli import _parse_grid, main
from mimome.constellations import constellation
from mimome.ergodic import METHODS, allocate_by_method, rate_by_method
from mimome.gsvd import gsvd, reduce_to_parallel
from mimome.scenario import ScenarioError, parse_scenario

DATA = Path(__file__).parent / "data"


def _draw_pair(seed, m_b, m_e, m_a):
    rng = np.random.default_rng(seed)
    hb = (rng.standard_normal((m_b, m_a)) + 1j * rng.standard_normal((m_b, m_a)))
    he = (rng.standard_normal((m_e, m_a)) + 1j * rng.standard_normal((m_e, m_a)))
    return hb / np.sqrt(2), he / np.sqrt(2)


@pytest.fixture()
def pair_files(tmp_path):
    """A 2x3 / 2x3 channel pair saved as JSON, plus the raw arrays."""
    hb, he = _draw_pair(3, 2, 2, 3)
    pb, pe = tmp_path / "hb.json", tmp_path / "he.json"
    save_matrix(pb, hb)
    save_matrix(pe, he)
    return str(pb), str(pe), hb, he


def _scenario(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _parse_csv(text):
    lines = text.rstrip("\n").split("\n")
    assert lines[0].startswith(f"# mimome {__version__} | ")
    cols = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    for row in rows:
        assert len(row) == len(cols)
    return lines[0], cols, rows


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == f"mimome {__version__}"


# ------------------------------------------------------------------ matrices

def test_matrix_json_round_trip(tmp_path):
    m = np.array([[1.5 - 2.0j, 0.0 + 1e-300j], [-3.25 + 0.5j, 7.0 + 0.0j]])
    obj = matrix_to_json(m)
    assert obj["rows"] == 2 and obj["cols"] == 2
    assert len(obj["data"]) == 4
    # row-major: data[1] is entry (0, 1)
    assert obj["data"][1] == [0.0, 1e-300]
    back = matrix_from_json(obj)
    assert back.dtype == complex
    assert np.array_equal(back, m)

    path = tmp_path / "m.json"
    save_matrix(path, m)
    assert np.array_equal(load_matrix(path), m)
    # the file is plain JSON, loadable by anything
    raw = json.loads(path.read_text())
    assert set(raw) == {"rows", "cols", "data"}


def test_matrix_json_rejects_malformed():
    with pytest.raises(ValueError, match="rows"):
        matrix_from_json({"rows": 0, "cols": 2, "data": []})
    with pytest.raises(ValueError, match="length"):
        matrix_from_json({"rows": 2, "cols": 2, "data": [[1, 0]]})
    with pytest.raises(ValueError, match=r"\[re, im\]"):
        matrix_from_json({"rows": 1, "cols": 1, "data": [[1.0]]})
    with pytest.raises(ValueError, match="missing field"):
        matrix_from_json({"rows": 1, "data": [[1, 0]]})


# ---------------------------------------------------------------------- gsvd

def test_gsvd_matches_library(pair_files, tmp_path):
    pb, pe, hb, he = pair_files
    out = tmp_path / "g.json"
    assert main(["gsvd", pb, pe, "--out", str(out)]) == 0
    got = json.loads(out.read_text())

    g = gsvd(ChannelPair(hb, he))
    assert (got["ma"], got["mb"], got["me"]) == (g.m_a, g.m_b, g.m_e)
    assert (got["k"], got["r"], got["s"], got["nu"]) == (g.k, g.r, g.s, g.nu)
    assert got["null_dim"] == g.null_dim
    np.testing.assert_allclose(got["b"], g.b, atol=1e-12)
    np.testing.assert_allclose(got["e"], g.e, atol=1e-12)
    np.testing.assert_allclose(got["omega"], g.omega, rtol=1e-12)
    assert got["reconstruction_error"] < 1e-10
    assert "psi_a" not in got  # factors only with --full


def test_gsvd_full_factors_rebuild_channels(pair_files, tmp_path):
    pb, pe, hb, he = pair_files
    out = tmp_path / "g.json"
    assert main(["gsvd", pb, pe, "--full", "--out", str(out)]) == 0
    got = json.loads(out.read_text())

    psi_a = matrix_from_json(got["psi_a"])
    psi_b = matrix_from_json(got["psi_b"])
    psi_e = matrix_from_json(got["psi_e"])
    sigma_b = matrix_from_json(got["sigma_b"])
    sigma_e = matrix_from_json(got["sigma_e"])
    omega_mat = matrix_from_json(got["omega_mat"])

    k, m_a = got["k"], got["ma"]
    right = np.zeros((k, m_a), dtype=complex)
    right[:, :k] = np.linalg.inv(omega_mat)
    right = right @ psi_a.conj().T
    scale = max(np.linalg.norm(hb), np.linalg.norm(he))
    assert np.linalg.norm(psi_b @ sigma_b @ right - hb) <= 1e-10 * scale
    assert np.linalg.norm(psi_e @ sigma_e @ right - he) <= 1e-10 * scale


def test_gsvd_missing_file_exit_code(tmp_path, capsys):
    missing = str(tmp_path / "nope.json")
    assert main(["gsvd", missing, missing]) == 4
    assert "i/o error" in capsys.readouterr().err


# ------------------------------------------------------------------ mi-table

def test_mi_table_shape(capsys):
    assert main(["mi-table", "--constellation", "qpsk", "--points", "7"]) == 0
    header, cols, rows = _parse_csv(capsys.readouterr().out)
    assert "cmd=mi-table" in header and "constellation=qpsk" in header
    assert cols == ["rho", "I_bits", "mmse"]
    assert len(rows) == 7

    rho = np.array([float(r[0]) for r in rows])
    mi = np.array([float(r[1]) for r in rows])
    mm = np.array([float(r[2]) for r in rows])
    assert rho[0] == pytest.approx(1e-4) and rho[-1] == pytest.approx(1e4)
    assert np.all(np.diff(rho) > 0)
    assert np.all(np.diff(mi) >= 0) and mi[-1] <= 2.0 + 1e-12
    assert np.all(mm >= 0) and mm[0] > mm[-1]


def test_mi_table_validation(capsys):
    assert main(["mi-table", "--constellation", "bpsk", "--points", "1"]) == 2
    assert main(["mi-table", "--constellation", "bpsk", "--rho-min", "0"]) == 2
    assert main(["mi-table", "--constellation", "m17"]) == 2
    err = capsys.readouterr().err
    assert err.count("mimome:") == 3


# ------------------------------------------------------------------ allocate

def test_allocate_json_matches_library(pair_files, tmp_path):
    pb, pe, hb, he = pair_files
    scn = _scenario(tmp_path, "s.toml",
                    f'constellation = "qpsk"\nhb = "{pb}"\nhe = "{pe}"\n')
    out = tmp_path / "a.json"
    assert main(["allocate", "--scenario", scn, "--power-db", "10",
                 "--out", str(out)]) == 0
    got = json.loads(out.read_text())

    bank = reduce_to_parallel(gsvd(ChannelPair(hb, he)))
    c = constellation("qpsk")
    alloc = allocate_by_method(bank, c, 10.0, "dual", SolverConfig())
    rate = rate_by_method(bank, c, alloc, "dual")

    assert got["method"] == "dual" and got["constellation"] == "qpsk"
    assert got["total_power"] == pytest.approx(10.0)
    assert math.isclose(got["rate_bits"], rate, rel_tol=1e-12)
    np.testing.assert_allclose(got["p"], alloc.p, rtol=1e-12, atol=1e-15)
    assert got["converged"] is True
    assert sum(got["p"]) <= 10.0 * (1 + 1e-6)
    assert len(got["per_channel"]) >= 1
    for entry in got["per_channel"]:
        assert entry["rate_bob_bits"] >= entry["rate_eve_bits"] - 1e-12


def test_allocate_csv_row_per_channel(pair_files, tmp_path, capsys):
    pb, pe, _, _ = pair_files
    scn = _scenario(tmp_path, "s.toml",
                    f'constellation = "qpsk"\nhb = "{pb}"\nhe = "{pe}"\n')
    assert main(["allocate", "--scenario", scn, "--power-db", "10"]) == 0
    n_json = len(json.loads(capsys.readouterr().out)["per_channel"])

    assert main(["allocate", "--scenario", scn, "--power-db", "10",
                 "--format", "csv"]) == 0
    header, cols, rows = _parse_csv(capsys.readouterr().out)
    assert "cmd=allocate" in header
    assert cols == ["index", "kind", "power", "rate_bob_bits", "rate_eve_bits"]
    assert len(rows) == n_json


def test_allocate_high_snr_has_no_breakdown(pair_files, tmp_path, capsys):
    # high-snr rates are analytic, so the per-channel table is skipped and
    # csv output falls back to json
    pb, pe, _, _ = pair_files
    scn = _scenario(tmp_path, "s.toml",
                    f'constellation = "bpsk"\nhb = "{pb}"\nhe = "{pe}"\n')
    assert main(["allocate", "--scenario", scn, "--power-db", "30",
                 "--method", "high-snr", "--format", "csv"]) == 0
    got = json.loads(capsys.readouterr().out)
    assert got["per_channel"] == []
    assert got["rate_bits"] > 0


def test_allocate_scenario_defaults_and_overrides(pair_files, tmp_path, capsys):
    pb, pe, _, _ = pair_files
    scn = _scenario(tmp_path, "s.toml",
                    f'constellation = "bpsk"\nmethod = "uniform"\n'
                    f'hb = "{pb}"\nhe = "{pe}"\npower = 2.0\n')
    assert main(["allocate", "--scenario", scn]) == 0
    got = json.loads(capsys.readouterr().out)
    assert got["method"] == "uniform"
    assert got["total_power"] == pytest.approx(2.0)

    assert main(["allocate", "--scenario", scn, "--method", "dual",
                 "--constellation", "qpsk", "--power-db", "0"]) == 0
    got = json.loads(capsys.readouterr().out)
    assert (got["method"], got["constellation"]) == ("dual", "qpsk")
    assert got["total_power"] == pytest.approx(1.0)


def test_allocate_requires_power(pair_files, tmp_path, capsys):
    pb, pe, _, _ = pair_files
    scn = _scenario(tmp_path, "s.toml",
                    f'constellation = "bpsk"\nhb = "{pb}"\nhe = "{pe}"\n')
    assert main(["allocate", "--scenario", scn]) == 2
    assert "--power-db" in capsys.readouterr().err


# ----------------------------------------------------------------- scenarios

def test_scenario_rejects_both_sources(pair_files, tmp_path):
    pb, pe, _, _ = pair_files
    scn = _scenario(tmp_path, "s.toml",
                    f'hb = "{pb}"\nhe = "{pe}"\nma = 2\nmb = 2\nme = 2\n')
    with pytest.raises(ScenarioError, match="not both"):
        parse_scenario(scn)


def test_scenario_rejects_missing_source(tmp_path):
    scn = _scenario(tmp_path, "s.toml", 'constellation = "bpsk"\n')
    with pytest.raises(ScenarioError, match="channel source"):
        parse_scenario(scn)


def test_scenario_rejects_half_pair(pair_files, tmp_path):
    pb, _, _, _ = pair_files
    scn = _scenario(tmp_path, "s.toml", f'hb = "{pb}"\n')
    with pytest.raises(ScenarioError, match="both 'hb' and 'he'"):
        parse_scenario(scn)


def test_scenario_rejects_partial_ensemble(tmp_path):
    scn = _scenario(tmp_path, "s.toml", "ma = 2\n")
    with pytest.raises(ScenarioError, match="field 'mb'"):
        parse_scenario(scn)


def test_scenario_names_bad_fields(tmp_path):
    scn = _scenario(tmp_path, "s.toml", "ma = 2\nmb = 2\nme = 2\nbogus = 1\n")
    with pytest.raises(ScenarioError, match="field 'bogus'"):
        parse_scenario(scn)

    scn = _scenario(tmp_path, "neg.toml",
                    "ma = 2\nmb = 2\nme = 2\npower = -1.0\n")
    with pytest.raises(ScenarioError, match="field 'power'"):
        parse_scenario(scn)

    scn = _scenario(tmp_path, "meth.toml",
                    'ma = 2\nmb = 2\nme = 2\nmethod = "magic"\n')
    with pytest.raises(ScenarioError, match="field 'method'"):
        parse_scenario(scn)

    scn = _scenario(tmp_path, "fmt.toml",
                    'ma = 2\nmb = 2\nme = 2\nformat = "xml"\n')
    with pytest.raises(ScenarioError, match="field 'format'"):
        parse_scenario(scn)

    scn = _scenario(tmp_path, "pw2.toml",
                    "ma = 2\nmb = 2\nme = 2\npower = 1.0\npower_db = 0.0\n")
    with pytest.raises(ScenarioError, match="not both"):
        parse_scenario(scn)


def test_scenario_solver_keys(tmp_path):
    # camelCase and snake_case both name the same solver options
    scn = _scenario(tmp_path, "s.toml",
                    "ma = 2\nmb = 2\nme = 2\n[solver]\npowerTol = 1e-6\n"
                    "max_iters = 77\n")
    s = parse_scenario(scn)
    assert s.solver.power_tol == 1e-6 and s.solver.max_iters == 77

    scn = _scenario(tmp_path, "bad.toml",
                    "ma = 2\nmb = 2\nme = 2\n[solver]\nfancy = 1\n")
    with pytest.raises(ScenarioError, match="solver.fancy"):
        parse_scenario(scn)

    scn = _scenario(tmp_path, "badval.toml",
                    "ma = 2\nmb = 2\nme = 2\n[solver]\npowerTol = -1.0\n")
    with pytest.raises(ScenarioError, match="field 'solver'"):
        parse_scenario(scn)


def test_scenario_json_and_defaults(tmp_path):
    scn = _scenario(tmp_path, "s.json",
                    json.dumps({"ma": 3, "mb": 2, "me": 2, "power_db": 10.0}))
    s = parse_scenario(scn)
    assert s.ensemble is not None and s.pair is None
    assert (s.ensemble.trials, s.ensemble.seed) == (500, 42)
    assert s.method == "dual"
    assert s.power == pytest.approx(10.0)
    assert s.seed == 42


def test_scenario_missing_file_and_exit_code(tmp_path, capsys):
    with pytest.raises(ScenarioError, match="not found"):
        parse_scenario(str(tmp_path / "ghost.toml"))
    scn = _scenario(tmp_path, "s.toml", 'constellation = "bpsk"\n')
    assert main(["allocate", "--scenario", scn, "--power-db", "0"]) == 2
    assert "scenario error" in capsys.readouterr().err


# --------------------------------------------------------------------- sweep

def test_grid_parsing():
    g = _parse_grid("-10:40:2")
    assert len(g) == 26 and g[0] == -10.0 and g[-1] == 40.0
    assert np.allclose(np.diff(g), 2.0)
    assert _parse_grid("7").tolist() == [7.0]
    with pytest.raises(ValueError, match="start:stop:step"):
        _parse_grid("1:2:3:4")
    with pytest.raises(ValueError, match="positive"):
        _parse_grid("0:10:-1")
    with pytest.raises(ValueError, match="empty grid"):
        _parse_grid("5:0:1")


def test_sweep_all_methods_row_count(pair_files, tmp_path, capsys):
    pb, pe, _, _ = pair_files
    scn = _scenario(tmp_path, "s.toml",
                    f'constellation = "qpsk"\nhb = "{pb}"\nhe = "{pe}"\n')
    assert main(["sweep", "--scenario", scn, "--methods", "all",
                 "--snr-db", "0:10:5"]) == 0
    header, cols, rows = _parse_csv(capsys.readouterr().out)
    assert cols == ["snr_db", "method", "constellation", "mean_rate_bits",
                    "stderr", "trials"]
    assert len(rows) == 3 * len(METHODS)
    # snr-major ordering, methods in canonical order within each point
    assert [r[0] for r in rows] == ["0"] * 5 + ["5"] * 5 + ["10"] * 5
    assert [r[1] for r in rows[:5]] == list(METHODS)
    assert all(r[5] == "1" and r[4] == "0" for r in rows)


def test_sweep_byte_determinism(pair_files, tmp_path):
    pb, pe, _, _ = pair_files
    scn = _scenario(tmp_path, "s.toml",
                    f'constellation = "bpsk"\nhb = "{pb}"\nhe = "{pe}"\n')
    # negative grid starts need the = form, or argparse reads them as flags
    args = ["sweep", "--scenario", scn, "--methods", "dual,uniform",
            "--snr-db=-4:8:4"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().endswith(b"\n")


def test_sweep_gaussian_input_closes_methods(pair_files, tmp_path, capsys):
    # with a gaussian input the dual solver must land on the closed-form
    # waterfilling answer
    pb, pe, _, _ = pair_files
    scn = _scenario(tmp_path, "s.toml", f'hb = "{pb}"\nhe = "{pe}"\n')
    assert main(["sweep", "--scenario", scn, "--constellation", "gaussian",
                 "--methods", "dual,gaussian", "--snr-db", "0:10:5"]) == 0
    _, _, rows = _parse_csv(capsys.readouterr().out)
    by_snr = {}
    for r in rows:
        by_snr.setdefault(r[0], {})[r[1]] = float(r[3])
    assert len(by_snr) == 3
    for rates in by_snr.values():
        assert rates["dual"] == pytest.approx(rates["gaussian"], abs=1e-6)


def test_sweep_solver_failure_still_writes(pair_files, tmp_path, capsys):
    pb, pe, _, _ = pair_files
    scn = _scenario(tmp_path, "s.toml",
                    f'constellation = "qpsk"\nhb = "{pb}"\nhe = "{pe}"\n'
                    '[solver]\nmethod = "subgradient"\nmaxIters = 2\n')
    out = tmp_path / "fail.csv"
    assert main(["sweep", "--scenario", scn, "--snr-db", "10",
                 "--out", str(out)]) == 3
    assert "mimome sweep:" in capsys.readouterr().err
    _, _, rows = _parse_csv(out.read_text())
    assert rows == [["10", "dual", "qpsk", "nan", "0", "0"]]


def test_sweep_rejects_unknown_method(pair_files, tmp_path, capsys):
    pb, pe, _, _ = pair_files
    scn = _scenario(tmp_path, "s.toml",
                    f'constellation = "bpsk"\nhb = "{pb}"\nhe = "{pe}"\n')
    assert main(["sweep", "--scenario", scn, "--methods", "bogus"]) == 2
    assert main(["sweep", "--scenario", scn, "--methods", " , "]) == 2
    err = capsys.readouterr().err
    assert "unknown method" in err and "no methods" in err


def test_golden_sweep_regression(tmp_path):
    """Byte-exact pin of a small ensemble sweep.

    Regenerate after an intentional numeric change with:
      mimome sweep --scenario <ens.toml> --methods all --snr-db 0:10:5 \
          --out tests/data/golden_sweep.csv
    where ens.toml holds constellation="bpsk", ma=mb=me=2, trials=3, seed=7.
    """
    scn = _scenario(tmp_path, "ens.toml",
                    'constellation = "bpsk"\nma = 2\nmb = 2\nme = 2\n'
                    "trials = 3\nseed = 7\n")
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--scenario", scn, "--methods", "all",
                 "--snr-db", "0:10:5", "--out", str(out)]) == 0
    assert out.read_bytes() == (DATA / "golden_sweep.csv").read_bytes()


# ---------------------------------------------------- ergodic and partial-csi

def test_ergodic_cli(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["ergodic", "--ma", "2", "--mb", "2", "--me", "1",
                 "--trials", "2", "--seed", "5", "--constellation", "qpsk",
                 "--snr-db", "0:6:3", "--out", str(out)]) == 0
    header, cols, rows = _parse_csv(out.read_text())
    assert "cmd=ergodic" in header and "seed=5" in header
    assert len(rows) == 3
    for r in rows:
        assert r[1] == "dual" and r[5] == "2"
        assert math.isfinite(float(r[3])) and float(r[3]) >= 0


def test_partial_csi_cli_matches_exact_at_zero(tmp_path):
    base = ["--ma", "2", "--mb", "2", "--me", "1", "--trials", "2",
            "--seed", "5", "--constellation", "qpsk", "--snr-db", "5"]
    e_out = tmp_path / "e.csv"
    p_out = tmp_path / "p.csv"
    assert main(["ergodic", *base, "--out", str(e_out)]) == 0
    assert main(["partial-csi", *base, "--sigma-e2", "0,0.01",
                 "--noise-trials", "400", "--out", str(p_out)]) == 0

    _, cols, prows = _parse_csv(p_out.read_text())
    assert cols[-1] == "sigma_e2"
    assert [r[-1] for r in prows] == ["0", "0.01"]
    _, _, erows = _parse_csv(e_out.read_text())
    # sigma_e2 = 0 reproduces the exact ergodic mean, formatted identically
    assert prows[0][3] == erows[0][3]
    assert float(prows[1][3]) <= float(prows[0][3]) + 1e-9


def test_out_write_failure(capsys):
    assert main(["mi-table", "--constellation", "bpsk",
                 "--out", "/nonexistent/dir/x.csv"]) == 4
    assert "i/o error" in capsys.readouterr().err
