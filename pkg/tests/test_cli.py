"""Command-line interface: exit codes, determinism, and file outputs."""

import json
import subprocess
import sys

import numpy as np
import pytest

from covkg import build_lattice, random_solution
from covkg.cli import main
from covkg.solution import evaluate_fields, write_cauchy_csv


@pytest.fixture(scope="module")
def lat():
    return build_lattice(d=1, L=2 * np.pi, N=32, n_max=7, m=1.0)


def _read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


# ---------------------------------------------------------------------------
# Exit codes
# ---------------------------------------------------------------------------

def test_verify_single_suite_exits_zero(tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", "--suite", "observables", "--out", str(out)]) == 0
    data = json.loads(_read(out))
    assert data["schema_version"] == 1
    assert data["all_pass"] is True


def test_verify_forced_failure_exits_one(tmp_path):
    """An unreachable tolerance flips a passing check to failed."""
    out = tmp_path / "report.json"
    code = main(["verify", "--suite", "msymp", "--out", str(out),
                 "--tol", "msymp.kg_residual=0"])
    assert code == 1
    data = json.loads(_read(out))
    assert data["all_pass"] is False
    failed = [c for c in data["checks"] if not c["pass"]]
    assert [c["name"] for c in failed] == ["msymp.kg_residual"]


def test_usage_errors_exit_two(tmp_path):
    assert main(["verify", "--suite", "nosuch"]) == 2
    assert main(["verify", "--tol", "oops"]) == 2
    assert main(["verify", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["simulate", "--n-out", "1"]) == 2
    assert main(["prequant", "--max-degree", "9"]) == 2
    assert main(["nonsense"]) == 2


def test_unknown_config_key_exits_two(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"N": 16, "n_mx": 3}), encoding="utf-8")
    assert main(["verify", "--config", str(cfg)]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "covkg.cli", "spec"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    data = json.loads(proc.stdout)
    assert data["schema_version"] == 1
    assert data["N"] == 32


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def test_verify_report_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", "--suite", "phase-space", "--out", str(a)]) == 0
    assert main(["verify", "--suite", "phase-space", "--out", str(b)]) == 0
    assert _read(a) == _read(b)


def test_verify_report_structure(tmp_path):
    out = tmp_path / "report.json"
    main(["verify", "--suite", "msymp", "--out", str(out)])
    data = json.loads(_read(out))
    assert data["suite"] == "msymp"
    assert data["config"]["N"] == 32
    names = [c["name"] for c in data["checks"]]
    assert names == sorted(names)
    for c in data["checks"]:
        assert set(c) >= {"name", "lhs", "rhs", "abs_diff", "tolerance",
                          "pass"}


def test_verify_seed_override_changes_draws(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["verify", "--suite", "observables", "--out", str(a)])
    main(["verify", "--suite", "observables", "--out", str(b), "--seed", "5"])
    da, db = json.loads(_read(a)), json.loads(_read(b))
    assert da["config"]["seed"] == 0 and db["config"]["seed"] == 5
    assert da["all_pass"] and db["all_pass"]
    assert _read(a) != _read(b)


def test_config_file_applies(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"N": 16, "n_max": 5, "m": 1.3}),
                   encoding="utf-8")
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "prequant", "--config", str(cfg),
                 "--out", str(out)]) == 0
    data = json.loads(_read(out))
    assert data["config"]["N"] == 16
    assert data["config"]["m"] == 1.3


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def test_simulate_conserves_tracked_quantities(tmp_path):
    out = tmp_path / "series.csv"
    code = main(["simulate", "--t-final", "2.0", "--n-out", "9",
                 "--out", str(out)])
    assert code == 0
    lines = _read(out).strip().split("\n")
    assert lines[0] == "# schema_version=1"
    header = lines[1].split(",")
    assert header[:3] == ["t", "energy", "momentum_1"]
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    assert rows.shape[0] == 9
    np.testing.assert_allclose(rows[:, 0], np.linspace(0.0, 2.0, 9),
                               atol=1e-12)
    np.testing.assert_allclose(rows[:, 1], rows[0, 1], atol=1e-10)
    np.testing.assert_allclose(rows[:, 2], rows[0, 2], atol=1e-10)
    for col in range(3, rows.shape[1]):
        np.testing.assert_allclose(rows[:, col], rows[0, col], atol=1e-10)


def test_simulate_leapfrog_column_tracks_energy(tmp_path):
    out = tmp_path / "series.csv"
    main(["simulate", "--t-final", "2.0", "--n-out", "5",
          "--leapfrog-dt", "0.01", "--out", str(out)])
    lines = _read(out).strip().split("\n")
    header = lines[1].split(",")
    assert header[-1] == "energy_leapfrog"
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    exact, stepped = rows[:, 1], rows[:, -1]
    assert np.max(np.abs(stepped - exact) / exact[0]) < 1e-4


def test_simulate_from_cauchy_file(tmp_path, lat):
    sol = random_solution(lat, np.random.default_rng(3))
    sd = evaluate_fields(sol, 0.0)
    cauchy = tmp_path / "cauchy.csv"
    write_cauchy_csv(lat, sd.phi, sd.p[0], cauchy)
    out = tmp_path / "series.csv"
    code = main(["simulate", "--cauchy", str(cauchy), "--t-final", "1.0",
                 "--n-out", "3", "--out", str(out)])
    assert code == 0
    lines = _read(out).strip().split("\n")
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    from covkg import energy_integral

    assert rows[0, 1] == pytest.approx(energy_integral(sol, 0.0), abs=1e-10)


def test_simulate_track_selection(tmp_path):
    out = tmp_path / "series.csv"
    main(["simulate", "--track", "0,7", "--t-final", "1.0", "--n-out", "3",
          "--out", str(out)])
    header = _read(out).strip().split("\n")[1].split(",")
    assert "a_abs_0" in header and "a_abs_7" in header


# ---------------------------------------------------------------------------
# brackets and prequant
# ---------------------------------------------------------------------------

def test_brackets_report_passes(tmp_path):
    out = tmp_path / "br.json"
    assert main(["brackets", "--out", str(out)]) == 0
    data = json.loads(_read(out))
    assert data["all_pass"] is True
    names = {c["name"] for c in data["checks"]}
    assert "brackets.single_mode_pinned" in names


def test_prequant_spectrum_csv(tmp_path):
    out = tmp_path / "pq.json"
    spectrum = tmp_path / "spectrum.csv"
    code = main(["prequant", "--max-degree", "1", "--out", str(out),
                 "--spectrum-out", str(spectrum)])
    assert code == 0
    lines = _read(spectrum).strip().split("\n")
    assert lines[0] == "# schema_version=1"
    assert lines[1] == "multi_index,eigenvalue,energy"
    assert lines[2].startswith(",")  # vacuum row has the empty multi-index
    vac = lines[2].split(",")
    assert float(vac[1]) == 0.0 and float(vac[2]) == 0.0
    rows = [ln.split(",") for ln in lines[3:]]
    for label, eig, energy in rows:
        assert float(energy) == -float(eig)
        assert float(energy) > 0.0


def test_prequant_fg_file(tmp_path, lat):
    rng = np.random.default_rng(2)
    fg = {"f": [[float(rng.standard_normal()), 0.0]
                for _ in range(lat.n_modes)],
          "g": [[1.0, 0.0] for _ in range(lat.n_modes)]}
    path = tmp_path / "fg.json"
    path.write_text(json.dumps(fg), encoding="utf-8")
    out = tmp_path / "pq.json"
    assert main(["prequant", "--fg", str(path), "--out", str(out)]) == 0
    assert json.loads(_read(out))["all_pass"] is True


def test_prequant_rejects_wrong_length_fg(tmp_path):
    path = tmp_path / "fg.json"
    path.write_text(json.dumps({"f": [[1.0, 0.0]], "g": [[1.0, 0.0]]}),
                    encoding="utf-8")
    assert main(["prequant", "--fg", str(path)]) == 2
