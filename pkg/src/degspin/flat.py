"""Flat-space Levy-Leblond checks with exact derivatives.

Plane waves are ``exp(+i (k.x - E t))``.  The Schrodinger wave function sits
in the lower 2-spinor: for ``psi = (upper, chi)`` the lower block of the
flat equation forces ``upper = (sigma . grad chi) / (2 m i)`` and the upper
block then reads ``-i (i d_t chi + Laplacian chi / 2m) = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spinor import SIGMA, _check_mass, ll_operator_exact


def planewave_spinor(k, m: float, u2=(1.0, 0.0)):
    """Amplitude ``(u1, u2)`` and energy of the plane-wave solution with momentum ``k``."""
    _check_mass(m)
    k = np.asarray(k, dtype=float)
    u2 = np.asarray(u2, dtype=complex)
    u2 = u2 / np.linalg.norm(u2)
    sk = np.einsum("i,ijk->jk", k, SIGMA)
    u1 = sk @ u2 / (2 * m)
    return np.concatenate([u1, u2]), float(k @ k) / (2 * m)


def planewave_check(k, m: float, u2=(1.0, 0.0), energy=None, point=(0.0, 0.0, 0.0, 0.0)) -> float:
    """Euclidean norm of the flat LL residual of the plane wave at ``point``.

    ``energy`` overrides the dispersion relation ``|k|^2 / 2m`` to probe
    off-shell waves.
    """
    amp, e_shell = planewave_spinor(k, m, u2)
    E = e_shell if energy is None else float(energy)
    k = np.asarray(k, dtype=float)
    p = np.asarray(point, dtype=float)
    phase = np.exp(1j * (k @ p[1:] - E * p[0]))
    psi = amp * phase
    dpsi = np.stack([-1j * E * psi] + [1j * kj * psi for kj in k])
    return float(np.linalg.norm(ll_operator_exact(psi, dpsi, m)))


class GaussianPacket1D:
    """Free 1D Schrodinger Gaussian (``static=True`` freezes it at ``t = 0``).

    ``phi = (2 pi s0^2)^(-1/4) w^(-1/2) exp(-(x - x0 - v t)^2 / (4 s0^2 w) + i k0 (x - x0) - i k0^2 t / 2m)``
    with ``w = 1 + i t / (2 m s0^2)`` and ``v = k0 / m``.  Derivatives come
    from the log-derivatives of the exponent.
    """

    def __init__(self, m: float, sigma0: float = 1.0, k0: float = 0.0, x0: float = 0.0, static: bool = False):
        _check_mass(m)
        self.m, self.sigma0, self.k0, self.x0, self.static = m, sigma0, k0, x0, static
        self.beta = 1.0 / (2 * m * sigma0**2)

    def jet(self, x, t):
        """``(phi, L_x, L_xx, L_t, L_tx)`` with ``L = log phi``."""
        x = np.asarray(x, dtype=float)
        t = np.zeros_like(x) + (0.0 if self.static else np.asarray(t, dtype=float))
        s2 = self.sigma0**2
        w = 1 + 1j * self.beta * t
        d = x - self.x0 - (self.k0 / self.m) * t
        phi = (
            (2 * np.pi * s2) ** -0.25
            * w**-0.5
            * np.exp(-(d**2) / (4 * s2 * w) + 1j * self.k0 * (x - self.x0) - 1j * self.k0**2 * t / (2 * self.m))
        )
        Lx = -d / (2 * s2 * w) + 1j * self.k0
        Lxx = -1 / (2 * s2 * w) + 0 * d
        if self.static:
            return phi, Lx, Lxx, np.zeros_like(phi), np.zeros_like(phi)
        v = self.k0 / self.m
        ib = 1j * self.beta
        Lt = -0.5 * ib / w + d * v / (2 * s2 * w) + d**2 * ib / (4 * s2 * w**2) - 1j * self.k0**2 / (2 * self.m)
        Ltx = v / (2 * s2 * w) + d * ib / (2 * s2 * w**2)
        return phi, Lx, Lxx, Lt, Ltx

    def __call__(self, x, t):
        return self.jet(x, t)[0]


@dataclass
class SpinorJet:
    """A 2-spinor field and its derivatives at a batch of points.

    ``value`` has shape ``(n, 2)``; ``grad[j]``, ``dt_grad[j]`` and
    ``hess[j, l]`` follow with leading derivative indices.
    """

    value: np.ndarray
    dt: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    dt_grad: np.ndarray


class GaussianFamily:
    """``chi = u * prod_j phi_j(x_j, t)`` for three 1D packets and a constant 2-spinor ``u``.

    A product of free 1D solutions solves the 3D free Schrodinger equation.
    """

    def __init__(self, m: float, sigma0=(1.0, 1.0, 1.0), k0=(0.0, 0.0, 0.0), x0=(0.0, 0.0, 0.0),
                 u=(1.0, 0.0), static: bool = False):
        self.m = m
        self.packets = [GaussianPacket1D(m, s, k, c, static) for s, k, c in zip(sigma0, k0, x0)]
        u = np.asarray(u, dtype=complex)
        self.u = u / np.linalg.norm(u)

    def jet(self, points) -> SpinorJet:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        t = pts[:, 0]
        jets = [pk.jet(pts[:, j + 1], t) for j, pk in enumerate(self.packets)]
        scal = np.prod([j[0] for j in jets], axis=0)
        Lx = np.stack([j[1] for j in jets])
        Lxx = np.stack([j[2] for j in jets])
        Lt = np.sum([j[3] for j in jets], axis=0)
        Ltx = np.stack([j[4] for j in jets])
        hess = Lx[:, None] * Lx[None, :]
        hess[np.arange(3), np.arange(3)] += Lxx
        dt_grad = Ltx + Lx * Lt

        def spin(a):
            return (a * scal)[..., None] * self.u

        return SpinorJet(spin(np.ones_like(scal)), spin(Lt), spin(Lx), spin(hess), spin(dt_grad))


class PlaneWave2:
    """``chi = u exp(i (k.x - E t))``; ``E`` defaults to the free dispersion."""

    def __init__(self, m: float, k=(0.0, 0.0, 0.0), u=(1.0, 0.0), energy=None):
        _check_mass(m)
        self.m = m
        self.k = np.asarray(k, dtype=float)
        self.E = float(self.k @ self.k) / (2 * m) if energy is None else float(energy)
        u = np.asarray(u, dtype=complex)
        self.u = u / np.linalg.norm(u)

    def jet(self, points) -> SpinorJet:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        scal = np.exp(1j * (pts[:, 1:] @ self.k - self.E * pts[:, 0]))
        ik = 1j * self.k[:, None] * np.ones_like(scal)
        hess = ik[:, None] * ik[None, :]

        def spin(a):
            return (a * scal)[..., None] * self.u

        return SpinorJet(spin(np.ones_like(scal)), spin(-1j * self.E * np.ones_like(scal)), spin(ik),
                         spin(hess), spin(ik * (-1j * self.E)))


def reconstruct(jet: SpinorJet, m: float):
    """4-spinor ``(sigma.grad chi / 2mi, chi)`` and its exact derivatives ``d_a psi``."""
    _check_mass(m)
    c = 1.0 / (2j * m)

    def sdot(vecs):  # sum_j sigma_j vecs[j]
        return c * np.einsum("jab,j...b->...a", SIGMA, vecs)

    upper = sdot(jet.grad)
    psi = np.concatenate([upper, jet.value], axis=-1)
    d_upper = [sdot(jet.dt_grad)] + [sdot(jet.hess[:, l]) for l in range(3)]
    d_lower = [jet.dt] + [jet.grad[l] for l in range(3)]
    dpsi = np.stack([np.concatenate([u, l], axis=-1) for u, l in zip(d_upper, d_lower)])
    return psi, dpsi


@dataclass(frozen=True)
class ReduceResult:
    ll_residual: float
    ll_rms: float
    schrodinger_residual: float
    max_norm_gap: float
    lower_block: float
    consistent: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def reduce_check(chi, m: float, points, threshold: float = 1e-10) -> ReduceResult:
    """LL residual of the reconstructed spinor against the Schrodinger residual of ``chi``.

    ``consistent`` holds when the two vanish together at ``threshold``.
    """
    jet = chi.jet(points)
    psi, dpsi = reconstruct(jet, m)
    ll = ll_operator_exact(psi, dpsi, m)
    lap = np.einsum("jj...->...", jet.hess)
    schr = 1j * jet.dt + lap / (2 * m)
    ll_norm = np.linalg.norm(ll, axis=-1)
    s_norm = np.linalg.norm(schr, axis=-1)
    ll_max, s_max = float(ll_norm.max()), float(s_norm.max())
    return ReduceResult(
        ll_residual=ll_max,
        ll_rms=float(np.sqrt(np.mean(ll_norm**2))),
        schrodinger_residual=s_max,
        max_norm_gap=float(np.max(np.abs(ll_norm - s_norm))),
        lower_block=float(np.max(np.abs(ll[..., 2:]))),
        consistent=(ll_max <= threshold) == (s_max <= threshold),
    )
