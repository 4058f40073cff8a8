"""Invariant suites behind ``degspin verify``.

Each suite returns a :class:`SuiteResult` whose ``checks`` map a check name
to ``(value, limit, passed)``.  Randomised checks use fixed seeds.
"""

from __future__ import annotations

import io
import tempfile
import time
from contextlib import redirect_stderr, redirect_stdout
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from . import clifford as cl
from . import groups as gr
from . import newton_cartan as nc
from . import spinor as sp
from .flat import GaussianFamily, PlaneWave2, planewave_check, reduce_check
from .solver import SolveConfig, evolve_wavepacket, read_csv, write_csv

SEED = 20240611


@dataclass
class SuiteResult:
    name: str
    checks: dict = field(default_factory=dict)
    seconds: float = 0.0
    error: str = ""

    @property
    def passed(self) -> bool:
        return not self.error and all(ok for _, _, ok in self.checks.values())

    def add(self, name: str, value, limit, ok=None):
        """Record ``value <= limit`` (or an explicit verdict)."""
        value = float(value)
        if ok is None:
            ok = bool(value <= limit)
        self.checks[name] = (value, limit, bool(ok))

    def failed(self) -> list:
        return [k for k, (_, _, ok) in self.checks.items() if not ok]

    def as_dict(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "seconds": self.seconds,
            "error": self.error,
            "checks": {k: {"value": v, "limit": lim, "passed": ok} for k, (v, lim, ok) in self.checks.items()},
        }


# --------------------------------------------------------------------------
# independent Clifford oracle


def word_product(a: int, b: int):
    """Product of two canonical blades by bubble-sorting the generator word.

    Works on explicit index lists: each adjacent swap of distinct generators
    flips the sign, and a repeated adjacent pair contracts to its square
    (0 for ``f``, +1 otherwise).  Returns ``(sign, mask)``.
    """
    squares = (0, 1, 1, 1)
    word = [i for i in range(4) if a >> i & 1] + [i for i in range(4) if b >> i & 1]
    sign = 1
    changed = True
    while changed:
        changed = False
        k = 0
        while k < len(word) - 1:
            if word[k] > word[k + 1]:
                word[k], word[k + 1] = word[k + 1], word[k]
                sign = -sign
                changed = True
            elif word[k] == word[k + 1]:
                sign *= squares[word[k]]
                del word[k : k + 2]
                changed = True
                continue
            k += 1
    mask = sum(1 << i for i in word)
    return (sign, mask) if sign else (0, 0)


def _oracle_gp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for i in range(cl.DIM):
        for j in range(cl.DIM):
            s, m = word_product(i, j)
            if s:
                out[..., m] += s * a[..., i] * b[..., j]
    return out


def clifford_suite() -> SuiteResult:
    res = SuiteResult("clifford")
    rng = np.random.default_rng(SEED)
    mismatches = 0
    for i in range(cl.DIM):
        for j in range(cl.DIM):
            ts = int(cl.SIGN_TABLE[i, j])
            if (ts, int(cl.RESULT_TABLE[i, j]) if ts else 0) != word_product(i, j):
                mismatches += 1
    res.add("table_mismatches", mismatches, 0)

    a, b, c = rng.normal(size=(3, 1000, cl.DIM))
    left = cl.gp_array(cl.gp_array(a, b), c)
    right = cl.gp_array(a, cl.gp_array(b, c))
    res.add("associativity", np.max(np.abs(left - right)), 1e-12)
    res.add("product_vs_oracle", np.max(np.abs(cl.gp_array(a, b) - _oracle_gp(a, b))), 1e-12)

    gens = [cl.blade(n) for n in cl.GENERATOR_NAMES]
    res.add("f_squared", (gens[0] * gens[0]).max_abs(), 0.0)
    worst = 0.0
    for i, j in combinations(range(4), 2):
        worst = max(worst, (gens[i] * gens[j] + gens[j] * gens[i]).max_abs())
    res.add("anticommutation", worst, 0.0)
    squares_ok = all((gens[i] * gens[i]) == cl.ONE for i in (1, 2, 3))
    res.add("e_i_squared_one", 0.0 if squares_ok else 1.0, 0.0)
    return res


# --------------------------------------------------------------------------


def _random_spin_arrays(rng, n: int):
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True), rng.normal(size=(n, 3))


def group_suite(n: int = 10_000) -> SuiteResult:
    res = SuiteResult("group")
    rng = np.random.default_rng(SEED + 1)
    s1, v1 = _random_spin_arrays(rng, n)
    s2, v2 = _random_spin_arrays(rng, n)
    s12, v12 = gr.spin_mul_array(s1, v1, s2, v2)
    oracle = cl.gp_array(gr.embed_many(s1, v1), gr.embed_many(s2, v2))
    res.add("spin_mul_vs_clifford", np.max(np.abs(gr.embed_many(s12, v12) - oracle)), 1e-12)

    s3, v3 = _random_spin_arrays(rng, n)
    left = gr.spin_mul_array(*gr.spin_mul_array(s1, v1, s2, v2), s3, v3)
    right = gr.spin_mul_array(s1, v1, *gr.spin_mul_array(s2, v2, s3, v3))
    res.add("associativity", max(np.max(np.abs(left[0] - right[0])), np.max(np.abs(left[1] - right[1]))), 1e-12)

    si, vi = gr.spin_inv_array(s1, v1)
    prod = cl.gp_array(gr.embed_many(s1, v1), gr.embed_many(si, vi))
    prod[:, 0] -= 1.0
    res.add("inverse_law", np.max(np.abs(prod)), 1e-10)

    p1 = gr.rho_prime_array(s1, v1)
    p2 = gr.rho_prime_array(s2, v2)
    p12 = gr.rho_prime_array(s12, v12)
    res.add("rho_prime_homomorphism", np.max(np.abs(p12 - p1 @ p2)), 1e-10)
    res.add("rho_prime_sign_blind", np.max(np.abs(gr.rho_prime_array(-s1, v1) - p1)), 1e-12)

    G = gr.G_METRIC
    metric = np.max(np.abs(np.einsum("nji,jk,nkl->nil", p1, G, p1) - G))
    res.add("galilei_metric", metric, 1e-12)
    res.add("galilei_det", np.max(np.abs(np.linalg.det(p1) - 1.0)), 1e-12)
    res.add("galilei_radical", np.max(np.abs(p1[:, :, 0] - np.array([1.0, 0, 0, 0]))), 0.0)

    # literal conjugation by Clifford products on a subsample
    worst = 0.0
    for k in range(50):
        x = gr.Spin103Element(gr.Spin3Element.renormalized(*s1[k]), tuple(v1[k]))
        flipped = gr.RADICAL_FLIP @ gr.rho_prime(x).matrix @ gr.RADICAL_FLIP
        worst = max(worst, float(np.max(np.abs(gr.conjugation_matrix(x) - flipped))))
    res.add("conjugation_vs_rho_prime", worst, 1e-12)
    return res


def lie_suite() -> SuiteResult:
    res = SuiteResult("lie")
    basis = gr.spin103_basis()
    failures = 0
    for i, j in gr.basis_pairs(basis):
        lhs = gr.d_rho_prime(gr.lie_bracket(basis[i], basis[j])).matrix()
        rhs = gr.lie_bracket(gr.d_rho_prime(basis[i]), gr.d_rho_prime(basis[j])).matrix()
        failures += not np.array_equal(lhs, rhs)
    res.add("pairs_checked", len(gr.basis_pairs(basis)), 15, ok=len(gr.basis_pairs(basis)) == 15)
    res.add("bracket_mismatches", failures, 0)
    worst = 0.0
    for i, j in combinations(range(3), 2):
        br = gr.lie_bracket(basis[i], basis[j])
        worst = max(worst, float(np.max(np.abs(np.concatenate([br.b, br.c])))))
    res.add("boost_brackets_vanish", worst, 0.0)
    so_basis = gr.so103_basis()
    worst = 0.0
    for i, j in gr.basis_pairs(so_basis):
        br = gr.lie_bracket(so_basis[i], so_basis[j]).matrix()
        worst = max(worst, float(np.max(np.abs(br[:, 0]))))
    res.add("so103_closure_radical_column", worst, 0.0)
    return res


def tensor_suite(samples: int = 200) -> SuiteResult:
    res = SuiteResult("tensor")
    flat = nc.FlatField().at(np.zeros(4))
    gb = nc.gbar(flat.g, flat.tau)
    h = nc.hfield(flat.V, nc.hbar(gb))
    res.add("flat_gbar_identity", 0.0 if np.array_equal(gb, np.eye(4)) else 1.0, 0.0)
    res.add("flat_h_diag", 0.0 if np.array_equal(h, np.diag([0.0, 1, 1, 1])) else 1.0, 0.0)

    rng = np.random.default_rng(SEED + 2)
    w_inv = w_h = w_frame = 0.0
    for _ in range(samples):
        d = nc.random_point_data(rng)
        gb = nc.gbar(d.g, d.tau)
        hb = nc.hbar(gb)
        w_inv = max(w_inv, float(np.max(np.abs(hb @ gb - np.eye(4)))))
        w_h = max(w_h, nc.hfield_identity_residual(nc.hfield(d.V, hb), d.g, d.V, d.tau))
        w_frame = max(w_frame, max(nc.adapted_frame(d).residuals(d).values()))
    res.add("hbar_gbar_identity", w_inv, 1e-10)
    res.add("h_g_identity", w_h, 1e-10)
    res.add("adapted_frame", w_frame, 1e-10)

    field_ = nc.NewtonianField()
    r1 = nc.compatibility_check(field_, 1e-3).max
    r2 = nc.compatibility_check(field_, 5e-4).max
    res.add("newtonian_compatibility", r1, 1e-8)
    ratio = r1 / r2 if r2 > 0 else float("inf")
    res.add("newtonian_step_ratio", ratio, 4.5, ok=3.5 <= ratio <= 4.5)
    res.add("flat_compatibility", nc.compatibility_check(nc.FlatField()).max, 0.0)
    return res


def representation_suite(pairs: int = 1000) -> SuiteResult:
    res = SuiteResult("representation")
    inv = sp.GAMMA.invariant_residuals()
    integer = all(np.array_equal(g, np.round(g.real)) or np.array_equal(g, g.real + 1j * np.round(g.imag))
                  for g in sp.GAMMA)
    res.add("gamma_invariants", max(inv.values()), 0.0, ok=max(inv.values()) == 0.0 and integer)

    rng = np.random.default_rng(SEED + 3)
    a, b = rng.normal(size=(2, pairs, cl.DIM))
    lhs = sp.theta(cl.gp_array(a, b))
    rhs = sp.theta(a) @ sp.theta(b)
    res.add("theta_homomorphism", np.max(np.abs(lhs - rhs)), 1e-12)

    mism = sum(not np.array_equal(sp.lift(e), sp.lift_via_algebra(e)) for e in gr.so103_basis())
    res.add("lift_paths_basis_mismatches", mism, 0)
    worst = 0.0
    for _ in range(200):
        el = gr.So103Element.from_coefficients(rng.normal(size=3), rng.normal(size=3))
        worst = max(worst, float(np.max(np.abs(sp.lift(el) - sp.lift_via_algebra(el)))))
    res.add("lift_paths_random", worst, 1e-12)
    worst = max(sp.equivariance_residual(gr.Spin103Element.random(rng)) for _ in range(100))
    res.add("equivariance", worst, 1e-10)
    return res


def flat_suite() -> SuiteResult:
    res = SuiteResult("flat_ll")
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    ratio = float("inf")
    for _ in range(100):
        k = rng.normal(size=3)
        m = rng.uniform(0.5, 2.0)
        u2 = rng.normal(size=2) + 1j * rng.normal(size=2)
        point = rng.normal(size=4)
        worst = max(worst, planewave_check(k, m, u2, point=point))
        dE = rng.uniform(-0.1, 0.1)
        E = float(k @ k) / (2 * m) + dE
        ratio = min(ratio, planewave_check(k, m, u2, energy=E, point=point) / abs(dE))
    res.add("planewave_on_shell", worst, 1e-12)
    res.add("planewave_off_shell_ratio", ratio, 0.4, ok=ratio >= 0.4)

    points = np.column_stack([rng.uniform(0, 2, 50), rng.normal(size=(50, 3))])
    ll = schr = 0.0
    consistent = True
    for _ in range(10):
        fam = GaussianFamily(1.3, rng.uniform(0.5, 2, 3), rng.normal(size=3), rng.normal(size=3),
                             rng.normal(size=2) + 1j * rng.normal(size=2))
        r = reduce_check(fam, 1.3, points)
        ll, schr = max(ll, r.ll_residual), max(schr, r.schrodinger_residual)
        consistent &= r.consistent
    r = reduce_check(PlaneWave2(0.7, rng.normal(size=3)), 0.7, points)
    res.add("reduce_gaussian_ll", ll, 1e-10)
    res.add("reduce_gaussian_schrodinger", schr, 1e-10)
    res.add("reduce_planewave", max(r.ll_residual, r.schrodinger_residual), 1e-12)
    static = reduce_check(GaussianFamily(1.0, static=True), 1.0, points)
    res.add("static_norm_gap", static.max_norm_gap, 1e-10)
    consistent &= static.consistent and static.ll_residual > 1e-3
    res.add("vanish_together", 0.0 if consistent else 1.0, 0.0)
    return res


def solver_suite() -> SuiteResult:
    res = SuiteResult("solver")
    cfg = SolveConfig()
    report, _ = evolve_wavepacket(cfg)
    res.add("l2_error", report.l2_error, 1e-4)
    res.add("norm_drift", report.norm_drift, 1e-10)
    res.add("wall_time_s", report.wall_time, 30.0)
    half = SolveConfig(dt=cfg.dt / 2, steps=cfg.steps * 2)
    report_half, _ = _quick(half)
    ratio = report.time_error / report_half.time_error
    res.add("dt_halving_ratio", ratio, 4.5, ok=3.5 <= ratio <= 4.5)
    zero, _ = _quick(SolveConfig(steps=0))
    res.add("zero_steps_error", zero.l2_error, 0.0)
    return res


def _quick(cfg: SolveConfig):
    return evolve_wavepacket(cfg, residual=False)


_MALFORMED = """preset: newtonian
potential:
  - coefficient: 0.5
    exponents: [0, 1, 0]
"""


def cli_suite() -> SuiteResult:
    from .cli import main

    res = SuiteResult("cli")
    with tempfile.TemporaryDirectory() as tmp:
        bad = Path(tmp) / "bad.yaml"
        bad.write_text(_MALFORMED)
        err = io.StringIO()
        with redirect_stdout(io.StringIO()), redirect_stderr(err):
            code = main(["tensors", "--config", str(bad)])
        has_path = "potential[0].exponents" in err.getvalue() and "line 4" in err.getvalue()
        res.add("malformed_config_exit", code, 2, ok=code == 2 and has_path)

        _, traj = _quick(SolveConfig(grid_points=64, steps=20, save_every=5))
        path = write_csv(traj, Path(tmp) / "traj.csv")
        back = read_csv(path)
        exact = (np.array_equal(back.psi, traj.psi) and np.array_equal(back.x, traj.x)
                 and np.array_equal(back.times, traj.times))
        res.add("csv_round_trip", 0.0 if exact else 1.0, 0.0)
    return res


SUITES = {
    "clifford": clifford_suite,
    "group": group_suite,
    "lie": lie_suite,
    "tensor": tensor_suite,
    "representation": representation_suite,
    "flat_ll": flat_suite,
    "solver": solver_suite,
    "cli": cli_suite,
}


def run_suite(name: str) -> SuiteResult:
    start = time.perf_counter()
    try:
        res = SUITES[name]()
    except Exception as exc:  # a crashing suite is a failed suite
        res = SuiteResult(name, error=f"{type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - start
    return res


def run_all(names=None) -> list:
    return [run_suite(n) for n in (names or SUITES)]
