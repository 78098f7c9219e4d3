import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from gaussian_coherence.cli import CSV_HEADER, main

FIXTURES = Path(__file__).parent / "fixtures"
REGENERATE = os.environ.get("REGENERATE_GOLDENS") == "1"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out) if out.strip() else None


def write_config(tmp_path, text):
    path = tmp_path / "opts.cfg"
    path.write_text(text)
    return str(path)


# coherence -----------------------------------------------------------------

def test_coherence_coherent_state(capsys):
    code, rec = run_json(capsys, "coherence", "--family", "cts", "--beta", "1", "--n-th", "0", "--measure", "bures")
    assert code == 0
    assert list(rec) == ["family", "params", "measure", "coherence", "argmax_ni", "converged"]
    assert rec["coherence"] == pytest.approx(1 - math.exp(-0.5), abs=1e-11)
    assert rec["coherence"] == pytest.approx(0.393469, abs=1e-6)
    assert rec["converged"] is True


def test_coherence_thermal_is_zero(capsys):
    code, rec = run_json(capsys, "coherence", "--family", "sts", "--r", "0", "--n-th", "2", "--beta", "0", "--measure", "hellinger")
    assert code == 0 and rec["coherence"] == 0


def test_coherence_tss_ordering(capsys):
    values = []
    for r in ("0.5", "1"):
        code, rec = run_json(capsys, "coherence", "--family", "tss", "--r", r, "--n-th", "0", "--measure", "bures")
        assert code == 0
        values.append(rec["coherence"])
    assert 0 < values[0] < values[1] < 1


def test_coherence_photon_number_flags(capsys):
    _, rec = run_json(capsys, "coherence", "--family", "cts", "--n-coh", "4", "--n-th", "0", "--measure", "bures")
    assert rec["params"]["beta"] == 2.0
    assert rec["coherence"] == pytest.approx(1 - math.exp(-0.5) / 2, abs=1e-11)


def test_coherence_twelve_significant_digits(capsys):
    _, rec = run_json(capsys, "coherence", "--family", "sts", "--r", "0.7", "--n-th", "1.3", "--measure", "bures")
    assert rec["coherence"] == float(f"{rec['coherence']:.12g}")


@pytest.mark.parametrize(
    "argv",
    [
        ["coherence", "--family", "sts", "--r", "-1", "--n-th", "0", "--measure", "bures"],
        ["coherence", "--family", "sts", "--n-th", "0", "--measure", "bures"],
        ["coherence", "--family", "cts", "--beta", "1", "--n-coh", "1", "--n-th", "0", "--measure", "bures"],
        ["coherence", "--family", "tss", "--r", "1", "--n-th", "0", "--beta", "1", "--measure", "bures"],
    ],
)
def test_coherence_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_argparse_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["coherence", "--family", "nope", "--measure", "bures"])
    assert info.value.code == 2


def test_coherence_non_convergence_exit(capsys, tmp_path):
    cfg = write_config(tmp_path, "max_iters = 3\n")
    code, rec = run_json(capsys, "coherence", "--config", cfg, "--family", "sts", "--r", "1", "--n-th", "0.5", "--measure", "bures")
    assert code == 3 and rec["converged"] is False


# config --------------------------------------------------------------------

def test_config_overrides_grid(capsys, tmp_path):
    # With the scan capped at 1e-8..1e-6 the coherent state's optimum at ni = 3
    # is out of reach, so the value changes.
    argv = ["coherence", "--family", "cts", "--beta", "2", "--n-th", "0", "--measure", "bures"]
    _, default = run_json(capsys, *argv)
    cfg = write_config(tmp_path, "# narrow scan\ngrid_lo = 1e-8\ngrid_hi = 1e-6\npoints_per_decade = 4\n")
    _, narrowed = run_json(capsys, "coherence", "--config", cfg, *argv[1:])
    assert narrowed["coherence"] > default["coherence"]


@pytest.mark.parametrize("text", ["bogus = 1\n", "grid_lo = abc\n", "grid_lo = 5\ngrid_hi = 1\n", "dim = 4\n"])
def test_config_errors(capsys, tmp_path, text):
    cfg = write_config(tmp_path, text)
    code, _, err = run(capsys, "coherence", "--config", cfg, "--family", "cts", "--beta", "1", "--n-th", "0", "--measure", "bures")
    assert code == 2 and "error" in err


def test_config_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "coherence", "--config", str(tmp_path / "none.cfg"), "--family", "cts", "--beta", "1", "--n-th", "0", "--measure", "bures")
    assert code == 2


# sweep ---------------------------------------------------------------------

def parse_csv(text):
    lines = text.splitlines()
    return lines[0], [line.split(",") for line in lines[1:]]


def test_sweep_format(capsys):
    code, out, _ = run(capsys, "sweep", "--family", "sts", "--vary", "r", "--from", "0", "--to", "3", "--points", "5", "--n-th", "0", "--beta", "0")
    assert code == 0
    header, rows = parse_csv(out)
    assert header == CSV_HEADER
    assert len(rows) == 5
    for row in rows:
        assert len(row) == 5
        for cell in row:
            mantissa = cell.split("e")[0].lstrip("-")
            assert len(mantissa.replace(".", "")) == 12
    xs = [float(r[0]) for r in rows]
    assert xs == sorted(xs)
    bures = [float(r[1]) for r in rows]
    assert all(b < c for b, c in zip(bures, bures[1:]))


def test_sweep_absent_measure_is_empty(capsys):
    _, out, _ = run(capsys, "sweep", "--family", "cts", "--vary", "beta", "--from", "0", "--to", "1", "--points", "3", "--n-th", "0", "--measures", "hellinger")
    _, rows = parse_csv(out)
    for row in rows:
        assert row[1] == "" and row[3] == ""
        assert row[2] != "" and row[4] != ""


def test_sweep_degenerate_family(capsys):
    _, out, _ = run(capsys, "sweep", "--family", "cts", "--vary", "n_th", "--from", "0", "--to", "5", "--points", "2", "--beta", "0")
    _, rows = parse_csv(out)
    assert len(rows) == 2
    for row in rows:
        assert float(row[1]) == 0.0 and float(row[2]) == 0.0


def test_sweep_decreasing_in_noise(capsys):
    _, out, _ = run(capsys, "sweep", "--family", "cts", "--vary", "n_th", "--from", "0", "--to", "20", "--points", "20", "--beta", "2")
    _, rows = parse_csv(out)
    for col in (1, 2):
        values = [float(r[col]) for r in rows]
        assert all(b < a for a, b in zip(values, values[1:]))


def test_sweep_byte_stable_and_worker_independent(tmp_path, capsys):
    argv = ["sweep", "--family", "tss", "--vary", "r", "--from", "0", "--to", "2", "--points", "8", "--n-th", "1"]
    paths = []
    for i, workers in enumerate(("1", "1", "2")):
        path = tmp_path / f"run{i}.csv"
        assert main(argv + ["--out", str(path), "--workers", workers]) == 0
        paths.append(path)
    first = paths[0].read_bytes()
    assert all(p.read_bytes() == first for p in paths[1:])


def test_sweep_partial_failure(capsys, tmp_path):
    cfg = write_config(tmp_path, "max_iters = 3\n")
    code, out, _ = run(capsys, "sweep", "--config", cfg, "--family", "sts", "--vary", "r", "--from", "0.5", "--to", "1", "--points", "2", "--n-th", "0.5")
    assert code == 4
    _, rows = parse_csv(out)
    assert rows[0][1] == "nan" and rows[0][3] == "nan"


@pytest.mark.parametrize(
    "extra",
    [
        ["--vary", "r", "--from", "1", "--to", "0", "--n-th", "0"],
        ["--vary", "r", "--from", "0", "--to", "1", "--points", "1", "--n-th", "0"],
        ["--vary", "r", "--from", "0", "--to", "1", "--scale", "log", "--n-th", "0"],
        ["--vary", "r", "--from", "0", "--to", "1", "--r", "1", "--n-th", "0"],
        ["--vary", "r", "--from", "0", "--to", "1"],
        ["--vary", "r", "--from", "0", "--to", "1", "--n-th", "0", "--measures", "trace"],
    ],
)
def test_sweep_usage_errors(capsys, extra):
    code, _, _ = run(capsys, "sweep", "--family", "sts", *extra)
    assert code == 2


# golden sweeps ------------------------------------------------------

def _golden_sweeps():
    sweeps = {}
    for n in ("0", "1", "2"):
        sweeps[f"sts_r_nth{n}_beta0"] = ["--family", "sts", "--vary", "r", "--from", "0", "--to", "3", "--n-th", n, "--beta", "0"]
        sweeps[f"sts_r_nth{n}_beta1"] = ["--family", "sts", "--vary", "r", "--from", "0", "--to", "3", "--n-th", n, "--beta", "1"]
        sweeps[f"cts_beta_nth{n}"] = ["--family", "cts", "--vary", "beta", "--from", "0", "--to", "3", "--n-th", n]
        sweeps[f"tss_r_nth{n}"] = ["--family", "tss", "--vary", "r", "--from", "0", "--to", "3", "--n-th", n]
    for x in ("0", "1", "2"):
        sweeps[f"sts_nth_r{x}"] = ["--family", "sts", "--vary", "n_th", "--from", "0", "--to", "20", "--r", x]
        sweeps[f"cts_nth_beta{x}"] = ["--family", "cts", "--vary", "n_th", "--from", "0", "--to", "20", "--beta", x]
        sweeps[f"tss_nth_r{x}"] = ["--family", "tss", "--vary", "n_th", "--from", "0", "--to", "20", "--r", x]
    for x in ("0.5", "1", "2"):
        sweeps[f"sts_bures_lognth_r{x}"] = [
            "--family", "sts", "--vary", "n_th", "--from", "1e-2", "--to", "1e7", "--scale", "log",
            "--r", x, "--measures", "bures",
        ]
    return sweeps


GOLDEN_SWEEPS = _golden_sweeps()


@pytest.mark.parametrize("name", sorted(GOLDEN_SWEEPS))
def test_sweep_golden(name, tmp_path):
    golden = FIXTURES / f"{name}.csv"
    out = tmp_path / golden.name
    assert main(["sweep", *GOLDEN_SWEEPS[name], "--points", "20", "--out", str(out)]) == 0
    if REGENERATE:
        FIXTURES.mkdir(exist_ok=True)
        golden.write_bytes(out.read_bytes())
    assert golden.exists(), f"missing golden {golden}; run with REGENERATE_GOLDENS=1"
    assert out.read_bytes() == golden.read_bytes()


# threshold -----------------------------------------------------------------

def test_threshold_never(capsys):
    code, rec = run_json(capsys, "threshold", "--family", "cts", "--measure", "bures", "--n-coh", "2", "--vary", "n_th", "--lo", "0", "--hi", "1e12")
    assert code == 0
    assert rec == {"family": "cts", "measure": "bures", "target": 0.99, "vary": "n_th", "threshold": "never"}


def test_threshold_squeezed_vacuum(capsys):
    code, rec = run_json(capsys, "threshold", "--family", "sts", "--measure", "bures", "--target", "0.5", "--n-th", "0", "--vary", "n_sq", "--lo", "1", "--hi", "1e4")
    assert code == 0
    assert rec["threshold"] == pytest.approx(15.0, rel=2e-3)


def test_threshold_non_monotone_exit(capsys):
    code, _, err = run(capsys, "threshold", "--family", "sts", "--measure", "bures", "--target", "0.45", "--n-th", "0", "--beta", "1", "--vary", "r", "--lo", "0", "--hi", "2")
    assert code == 2 and "endpoint range" in err


def test_threshold_bad_target(capsys):
    code, _, _ = run(capsys, "threshold", "--family", "sts", "--measure", "bures", "--target", "1.5", "--n-th", "0", "--vary", "n_sq", "--lo", "1", "--hi", "10")
    assert code == 2


# asymptote -----------------------------------------------------------------

def test_asymptote_plateau(capsys):
    code, rec = run_json(capsys, "asymptote", "--r", "1", "--measure", "bures")
    assert code == 0
    assert rec["is_plateau"] is True and rec["plateau"] > 0
    assert len(rec["values"]) == len(rec["ladder"]) == 6


def test_asymptote_exceeds_initial(capsys):
    _, rec = run_json(capsys, "asymptote", "--r", "2", "--measure", "bures")
    assert rec["plateau"] > rec["initial"]


def test_asymptote_thermal(capsys):
    _, rec = run_json(capsys, "asymptote", "--r", "0")
    assert rec["plateau"] == 0


def test_asymptote_hellinger_constant(capsys):
    _, rec = run_json(capsys, "asymptote", "--r", "2", "--measure", "hellinger")
    for v in rec["values"]:
        assert v == pytest.approx(1 - math.cosh(2) ** -0.5, abs=1e-11)


@pytest.mark.parametrize("ladder", ["1,2,3", "1,3,2,4", "1,x,3,4"])
def test_asymptote_bad_ladder(capsys, ladder):
    code, _, _ = run(capsys, "asymptote", "--r", "1", "--ladder", ladder)
    assert code == 2


def test_asymptote_convergence_exit(capsys, tmp_path):
    cfg = write_config(tmp_path, "max_iters = 3\n")
    code, _ = run_json(capsys, "asymptote", "--config", cfg, "--r", "1")
    assert code == 3


# validate ------------------------------------------------------------------

def test_validate_thermal_grid(capsys):
    code, rec = run_json(capsys, "validate", "--grid", "thermal", "--quantities", "fidelity")
    assert code == 0 and rec["max_deviation"]["fidelity"] < 1e-12


def test_validate_thermal_grid_affinity(capsys):
    # The affinity formula differs from Tr[sqrt(rho) sqrt(sigma)] on mixed
    # pairs; the worst is thermal(2) vs vacuum, 2 (25/16)^{1/4} / 3 against 1/sqrt(3).
    code, rec = run_json(capsys, "validate", "--grid", "thermal")
    assert code == 5
    expected = 2 * (25 / 16) ** 0.25 / 3 - 3**-0.5
    assert rec["max_deviation"]["affinity"] == pytest.approx(expected, rel=1e-5)


def test_validate_custom_grid_fidelity(capsys):
    code, rec = run_json(capsys, "validate", "--grid", "beta=0,1;r=0.3;n_th=0,1;psi=0", "--quantities", "fidelity")
    assert code == 0 and rec["passed"] is True
    assert rec["comparisons"] == 4 * 3


def test_validate_truncation_too_small(capsys):
    code, _, err = run(capsys, "validate", "--dim", "16", "--grid", "r=1")
    assert code == 3 and "converge" in err


@pytest.mark.parametrize("extra", [["--grid", "x=1"], ["--quantities", "trace"], ["--dim", "4"]])
def test_validate_usage(capsys, extra):
    code, _, _ = run(capsys, "validate", *extra)
    assert code == 2


@pytest.mark.slow
def test_validate_default_grid_fidelity(capsys):
    code, rec = run_json(capsys, "validate", "--quantities", "fidelity")
    assert code == 0 and rec["max_dim"] <= 320 and rec["comparisons"] == 72 * 3


def test_console_script():
    proc = subprocess.run(
        [sys.executable, "-m", "gaussian_coherence.cli", "coherence", "--family", "cts", "--beta", "1", "--n-th", "0", "--measure", "bures"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["coherence"] == pytest.approx(0.393469340287)
