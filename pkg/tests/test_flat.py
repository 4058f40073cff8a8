import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from degspin.errors import InvalidMassError
from degspin.flat import (
    GaussianFamily,
    GaussianPacket1D,
    PlaneWave2,
    planewave_check,
    planewave_spinor,
    reconstruct,
    reduce_check,
)

from conftest import seeds


def test_planewave_examples():
    assert planewave_check((0, 0, 0), 1.0) == 0.0
    amp, E = planewave_spinor((0, 0, 0), 1.0)
    assert E == 0.0 and not np.any(amp[:2])
    assert planewave_check((1, 0, 0), 1.0) <= 1e-12
    amp, E = planewave_spinor((1, 0, 0), 1.0)
    assert E == 0.5
    np.testing.assert_allclose(amp[:2], [0, 0.5])  # sigma_1 (1, 0) / 2
    assert planewave_check((1, 0, 0), 1.0, energy=1.0) == pytest.approx(0.5)
    with pytest.raises(InvalidMassError):
        planewave_check((1, 0, 0), 0.0)


@given(seeds, st.floats(min_value=-0.1, max_value=0.1).filter(lambda d: abs(d) > 1e-6))
def test_off_shell_residual_is_energy_shift(seed, dE):
    # only the upper block sees the shift: its size is |dE| |u2| exactly
    rng = np.random.default_rng(seed)
    k, m = rng.normal(size=3), rng.uniform(0.3, 3.0)
    u2 = rng.normal(size=2) + 1j * rng.normal(size=2)
    assert planewave_check(k, m, u2) <= 1e-12
    r = planewave_check(k, m, u2, energy=float(k @ k) / (2 * m) + dE)
    assert r == pytest.approx(abs(dE), rel=1e-9)


def sympy_packet(m, s0, k0, x0):
    x, t = sympy.symbols("x t", real=True)
    w = 1 + sympy.I * t / (2 * m * s0**2)
    phi = ((2 * sympy.pi * s0**2) ** sympy.Rational(-1, 4) / sympy.sqrt(w)
           * sympy.exp(-((x - x0 - k0 * t / m) ** 2) / (4 * s0**2 * w) + sympy.I * k0 * (x - x0)
                       - sympy.I * k0**2 * t / (2 * m)))
    return x, t, phi


def test_gaussian_packet_against_symbolic_derivatives():
    m, s0, k0, x0 = sympy.Rational(3, 2), sympy.Rational(4, 5), sympy.Rational(7, 10), sympy.Rational(-1, 5)
    x, t, phi = sympy_packet(m, s0, k0, x0)
    # the closed form solves i phi_t + phi_xx / 2m = 0
    schr = sympy.I * sympy.diff(phi, t) + sympy.diff(phi, x, 2) / (2 * m)
    pk = GaussianPacket1D(float(m), float(s0), float(k0), float(x0))
    derivs = {
        "Lx": sympy.diff(phi, x) / phi,
        "Lxx": sympy.diff(phi, x, 2) / phi - (sympy.diff(phi, x) / phi) ** 2,
        "Lt": sympy.diff(phi, t) / phi,
        "Ltx": sympy.diff(phi, t, x) / phi - sympy.diff(phi, t) * sympy.diff(phi, x) / phi**2,
    }
    funcs = {k: sympy.lambdify((x, t), v, "numpy") for k, v in derivs.items()}
    f_phi = sympy.lambdify((x, t), phi, "numpy")
    f_schr = sympy.lambdify((x, t), schr, "numpy")
    xs = np.array([-1.3, 0.0, 0.4, 2.2])
    ts = np.array([0.0, 0.3, 1.1, 2.5])
    got = pk.jet(xs, ts)
    np.testing.assert_allclose(got[0], f_phi(xs, ts), rtol=1e-12)
    for idx, name in enumerate(("Lx", "Lxx", "Lt", "Ltx"), start=1):
        np.testing.assert_allclose(got[idx], funcs[name](xs, ts), rtol=1e-11, atol=1e-13)
    assert np.max(np.abs(f_schr(xs, ts))) < 1e-12


def test_gaussian_width_spreads():
    pk = GaussianPacket1D(1.0, 1.0, 0.0)
    x = np.linspace(-40, 40, 20001)
    dx = x[1] - x[0]
    for t in (0.0, 2.0):
        rho = np.abs(pk(x, t)) ** 2
        assert np.sum(rho) * dx == pytest.approx(1.0, abs=1e-10)
        width2 = np.sum(x**2 * rho) * dx
        assert width2 == pytest.approx(1.0 + (t / 2.0) ** 2, rel=1e-8)


def test_reconstruct_places_chi_in_lower_block():
    fam = GaussianFamily(1.0, k0=(0.5, 0.0, 0.0), u=(1, 1j))
    pts = np.array([[0.2, 0.1, -0.3, 0.4]])
    psi, dpsi = reconstruct(fam.jet(pts), 1.0)
    jet = fam.jet(pts)
    np.testing.assert_array_equal(psi[..., 2:], jet.value)
    assert dpsi.shape == (4, 1, 4)


@given(seeds)
def test_reduce_check_on_gaussian_family(seed):
    rng = np.random.default_rng(seed)
    m = rng.uniform(0.5, 2.0)
    fam = GaussianFamily(m, rng.uniform(0.5, 2.0, 3), rng.normal(size=3), rng.normal(size=3),
                         rng.normal(size=2) + 1j * rng.normal(size=2))
    pts = np.column_stack([rng.uniform(0, 2, 20), rng.normal(size=(20, 3))])
    r = reduce_check(fam, m, pts)
    assert r.ll_residual <= 1e-10 and r.schrodinger_residual <= 1e-10 and r.consistent


def test_reduce_check_plane_wave_and_static_gaussian():
    pts = np.array([[0.0, 0.0, 0.0, 0.0], [1.0, 0.5, -0.2, 0.3], [2.0, -1.0, 0.7, 0.1]])
    r = reduce_check(PlaneWave2(1.0, (1.0, -0.5, 0.2)), 1.0, pts)
    assert r.ll_residual <= 1e-12 and r.schrodinger_residual <= 1e-12
    static = reduce_check(GaussianFamily(1.0, static=True), 1.0, pts)
    assert static.ll_residual > 0.1
    assert static.max_norm_gap <= 1e-10
    assert static.lower_block <= 1e-15
    assert static.consistent
    wrong = reduce_check(PlaneWave2(1.0, (1.0, 0, 0), energy=0.8), 1.0, pts)
    assert wrong.ll_residual == pytest.approx(0.3) and wrong.consistent
