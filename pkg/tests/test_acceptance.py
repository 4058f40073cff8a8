"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The lines are collected and shown in the pytest terminal summary; running
this file directly prints them as well.
"""

import io
import re
import time
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import numpy as np

from degspin import verify
from degspin.cli import main
from degspin.solver import SolveConfig, evolve_wavepacket, read_csv, write_csv

from conftest import ACCEPTANCE_LINES


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def summarize(res):
    return ", ".join(f"{k}={v:.3g}" for k, (v, _, _) in res.checks.items())


def check_suite(number, title, res, seconds, time_limit=None):
    ok = res.passed and (time_limit is None or seconds < time_limit)
    limit = f" (limit {time_limit:g} s)" if time_limit else ""
    detail = f"{summarize(res)}; {seconds:.2f} s{limit}" + (f"; failed {res.failed()}" if res.failed() else "")
    record(number, title, ok, detail)
    assert res.passed, res.failed() or res.error
    if time_limit is not None:
        assert seconds < time_limit


def test_1_clifford():
    res, t = timed(verify.clifford_suite)
    check_suite(1, "Clifford table, associativity, relations", res, t, 1.0)


def test_2_group():
    res, t = timed(lambda: verify.group_suite(10_000))
    check_suite(2, "SPIN(1,0,3) over 1e4 pairs", res, t, 5.0)


def test_3_lie():
    res, t = timed(verify.lie_suite)
    check_suite(3, "Lie brackets on 15 basis pairs", res, t)


def test_4_tensor():
    res, t = timed(verify.tensor_suite)
    check_suite(4, "Newton-Cartan tensors and compatibility", res, t)


def test_5_representation():
    res, t = timed(verify.representation_suite)
    check_suite(5, "Gamma representation and lift", res, t)


def test_6_flat_ll():
    res, t = timed(verify.flat_suite)
    check_suite(6, "Flat Levy-Leblond checks", res, t)


def test_7_solver():
    start = time.perf_counter()
    report, _ = evolve_wavepacket(SolveConfig())
    run_time = time.perf_counter() - start
    half, _ = evolve_wavepacket(SolveConfig(dt=0.0005, steps=2000), residual=False)
    ratio = report.time_error / half.time_error
    ok = (report.l2_error <= 1e-4 and report.norm_drift <= 1e-10 and 3.5 <= ratio <= 4.5 and run_time < 30)
    record(7, "Wave-packet solver", ok,
           f"l2_error={report.l2_error:.3g} (<=1e-4), norm_drift={report.norm_drift:.3g} (<=1e-10), "
           f"dt ratio={ratio:.4f} (in [3.5, 4.5]), run {run_time:.2f} s (<30 s)")
    assert ok


def test_8_cli(tmp_path):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        verify_code = main(["verify"])
    rows = [ln for ln in out.getvalue().splitlines() if re.match(r"^\w+\s+(PASS|FAIL)\s", ln)]
    names = [r.split()[0] for r in rows]

    bad = tmp_path / "bad.yaml"
    bad.write_text("preset: newtonian\npotential:\n  - coefficient: 0.5\n    exponents: [0, 1]\n")
    err = io.StringIO()
    with redirect_stdout(io.StringIO()), redirect_stderr(err):
        bad_code = main(["tensors", "--config", str(bad)])
    path_msg = "potential[0].exponents (line 4)" in err.getvalue()

    _, traj = evolve_wavepacket(SolveConfig(grid_points=128, steps=50, save_every=10), residual=False)
    back = read_csv(write_csv(traj, tmp_path / "traj.csv"))
    exact = (np.array_equal(back.psi, traj.psi) and np.array_equal(back.x, traj.x)
             and np.array_equal(back.times, traj.times))

    ok = verify_code == 0 and names == list(verify.SUITES) and bad_code == 2 and path_msg and exact
    record(8, "CLI", ok,
           f"verify exit {verify_code} with {len(rows)} rows ({', '.join(names)}); malformed config exit "
           f"{bad_code}, field path cited={path_msg}; CSV round trip bit-exact={exact}")
    assert ok


if __name__ == "__main__":
    import tempfile

    for fn in (test_1_clifford, test_2_group, test_3_lie, test_4_tensor, test_5_representation,
               test_6_flat_ll, test_7_solver):
        try:
            fn()
        except AssertionError:
            pass
    with tempfile.TemporaryDirectory() as tmp:
        try:
            test_8_cli(Path(tmp))
        except AssertionError:
            pass
