"""Gamma-matrix representation of Cl(1,0,3), the lifted spinor connection and the operator D.

Spinors have four complex components: the upper 2-spinor in slots 0-1 and
the lower one in slots 2-3.  Units have hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .clifford import DIM, Multivector
from .errors import BoundaryError, InvalidMassError
from .groups import (
    RADICAL_FLIP,
    So103Element,
    Spin103Element,
    d_rho_prime_inv,
    embed,
    rho_prime,
    spin_inv,
)
from .newton_cartan import AdaptedFrame, ConnectionForm

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
I2 = np.eye(2, dtype=complex)
Z2 = np.zeros((2, 2), dtype=complex)


@dataclass(frozen=True)
class GammaSet:
    g0: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray

    def __iter__(self):
        return iter((self.g0, self.g1, self.g2, self.g3))

    def __getitem__(self, a: int) -> np.ndarray:
        return (self.g0, self.g1, self.g2, self.g3)[a]

    def as_array(self) -> np.ndarray:
        return np.stack(list(self))

    def invariant_residuals(self) -> dict:
        g = self.as_array()
        eye = np.eye(4)
        out = {
            "g0_block": float(np.max(np.abs(g[0] - np.block([[Z2, I2], [Z2, Z2]])))),
            "gi_block": max(
                float(np.max(np.abs(g[i + 1] - np.block([[SIGMA[i], Z2], [Z2, -SIGMA[i]]]))))
                for i in range(3)
            ),
            "g0_nilpotent": float(np.max(np.abs(g[0] @ g[0]))),
        }
        anti = 0.0
        for a in range(4):
            for b in range(4):
                target = 2.0 * eye * (a == b and a > 0)
                anti = max(anti, float(np.max(np.abs(g[a] @ g[b] + g[b] @ g[a] - target))))
        out["anticommutation"] = anti
        return out


def build_gamma() -> GammaSet:
    gs = GammaSet(
        np.block([[Z2, I2], [Z2, Z2]]),
        *(np.block([[SIGMA[i], Z2], [Z2, -SIGMA[i]]]) for i in range(3)),
    )
    bad = {k: v for k, v in gs.invariant_residuals().items() if v != 0.0}
    if bad:
        raise AssertionError(f"gamma matrices violate Cl(1,0,3) relations: {bad}")
    return gs


GAMMA = build_gamma()
GAMMA0_T = GAMMA.g0.T.copy()


def _blade_images(gs: GammaSet) -> np.ndarray:
    out = np.empty((DIM, 4, 4), dtype=complex)
    for mask in range(DIM):
        m = np.eye(4, dtype=complex)
        for bit in range(4):
            if mask >> bit & 1:
                m = m @ gs[bit]
        out[mask] = m
    return out


BLADE_IMAGES = _blade_images(GAMMA)


def theta(A: Union[Multivector, np.ndarray]) -> np.ndarray:
    """Matrix image; a canonical blade maps to the ordered product of generator images."""
    c = A.coeffs if isinstance(A, Multivector) else np.asarray(A, dtype=float)
    return np.tensordot(c, BLADE_IMAGES, axes=(-1, 0))


def lift(direction: So103Element) -> np.ndarray:
    """Spinor-bundle matrix of one so(1,0,3)-valued connection value.

    ``-1/2 sum_i w0_i g0 gi + 1/2 sum_{i<j} wij gi gj``.
    """
    out = np.zeros((4, 4), dtype=complex)
    for i, w in enumerate(direction.boost):
        out += -0.5 * w * (GAMMA.g0 @ GAMMA[i + 1])
    for (i, j), w in zip(((1, 2), (1, 3), (2, 3)), direction.rotation):
        out += 0.5 * w * (GAMMA[i] @ GAMMA[j])
    return out


def lift_via_algebra(direction: So103Element) -> np.ndarray:
    """Same matrix obtained as ``theta`` of the spin(1,0,3) preimage."""
    return theta(d_rho_prime_inv(direction).multivector())


_SPIN_SPAN = np.stack(
    [(GAMMA.g0 @ GAMMA[i]).ravel() for i in (1, 2, 3)]
    + [(GAMMA[i] @ GAMMA[j]).ravel() for i, j in ((1, 2), (1, 3), (2, 3))],
    axis=1,
)


@dataclass(frozen=True)
class LiftedConnection:
    """``matrices[c]`` is the 4x4 matrix acting on spinors along frame direction ``c``."""

    matrices: np.ndarray

    @classmethod
    def zero(cls) -> "LiftedConnection":
        return cls(np.zeros((4, 4, 4), dtype=complex))

    def span_residual(self) -> float:
        worst = 0.0
        for m in np.asarray(self.matrices).reshape(-1, 4, 4):
            coef, *_ = np.linalg.lstsq(_SPIN_SPAN, m.ravel(), rcond=None)
            worst = max(worst, float(np.max(np.abs(_SPIN_SPAN @ coef - m.ravel()))))
        return worst


def lift_connection(form: ConnectionForm) -> LiftedConnection:
    return LiftedConnection(np.stack([lift(form.direction(c)) for c in range(4)]))


def equivariance_residual(x: Spin103Element) -> float:
    """max_a |theta(S) G_a theta(S)^-1 - sum_b G_b rho'(S)[b, a]| with G = (-g0, g1, g2, g3).

    The frame ``(-f, e1, e2, e3)`` is the one in which ``rho_prime`` is the
    conjugation action (see :mod:`degspin.groups`).
    """
    ts = theta(embed(x))
    ts_inv = theta(embed(spin_inv(x)))
    flipped = np.einsum("ab,bij->aij", RADICAL_FLIP, GAMMA.as_array())
    phi = rho_prime(x).matrix
    worst = 0.0
    for a in range(4):
        lhs = ts @ flipped[a] @ ts_inv
        rhs = np.einsum("b,bij->ij", phi[:, a], flipped)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


# --------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class SpinorField:
    """Spinors sampled on a regular grid.

    ``values`` has shape ``grid_shape + (4,)``; grid axis ``k`` runs along
    coordinate ``axes[k]`` (0 = t, 1..3 = x, y, z) with the given spacing,
    origin and periodicity.  ``uniform_axes`` lists unsampled coordinates the
    field does not depend on (e.g. y and z for a 1D evolution).
    """

    values: np.ndarray
    axes: tuple
    spacing: tuple
    origin: tuple = None
    periodic: tuple = None
    uniform_axes: tuple = ()

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        nd = vals.ndim - 1
        if vals.shape[-1] != 4:
            raise ValueError("spinor fields carry four components in the last axis")
        if not (len(self.axes) == len(self.spacing) == nd):
            raise ValueError("axes and spacing must match the grid dimension")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "axes", tuple(int(a) for a in self.axes))
        object.__setattr__(self, "spacing", tuple(float(h) for h in self.spacing))
        object.__setattr__(self, "origin", tuple(self.origin) if self.origin is not None else (0.0,) * nd)
        object.__setattr__(self, "periodic", tuple(self.periodic) if self.periodic is not None else (False,) * nd)

    @property
    def grid_shape(self) -> tuple:
        return self.values.shape[:-1]

    def coordinates(self) -> list:
        return [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.grid_shape)]

    def interior(self) -> "SpinorField":
        """Drop one layer of nodes on every non-periodic axis."""
        return replace(
            self,
            values=_trim(self.values, self),
            origin=tuple(o + (0 if p else h) for o, h, p in zip(self.origin, self.spacing, self.periodic)),
        )


def _trim(arr, psi: SpinorField, item_ndim: int = 1):
    """Trim the leading grid axes of ``arr`` to the interior.

    ``item_ndim`` is the rank of one node's value; arrays of exactly that
    rank are constants and pass through.
    """
    arr = np.asarray(arr)
    nd = len(psi.grid_shape)
    if arr.ndim == item_ndim:
        return arr
    if arr.ndim != nd + item_ndim or arr.shape[:nd] != psi.grid_shape:
        raise ValueError(f"array of shape {arr.shape} does not match grid {psi.grid_shape}")
    sl = [slice(None)] * arr.ndim
    for k, per in enumerate(psi.periodic):
        if not per:
            sl[k] = slice(1, -1)
    return arr[tuple(sl)]


def _partial(psi: SpinorField, k: int) -> np.ndarray:
    v, h = psi.values, psi.spacing[k]
    if psi.periodic[k]:
        d = (np.roll(v, -1, axis=k) - np.roll(v, 1, axis=k)) / (2 * h)
        return _trim(d, psi)
    n = psi.grid_shape[k]
    hi = [slice(None)] * v.ndim
    lo = [slice(None)] * v.ndim
    hi[k], lo[k] = slice(2, n), slice(0, n - 2)
    d = (v[tuple(hi)] - v[tuple(lo)]) / (2 * h)
    sl = [slice(None)] * d.ndim
    for j, per in enumerate(psi.periodic):
        if not per and j != k:
            sl[j] = slice(1, -1)
    return d[tuple(sl)]


def _frame_matrix(frame) -> np.ndarray:
    if isinstance(frame, AdaptedFrame):
        return frame.X
    if frame is None:
        return np.eye(4)
    return np.asarray(frame, dtype=float)


def covariant_derivative(psi: SpinorField, c: int, frame=None, conn: Optional[LiftedConnection] = None) -> SpinorField:
    """Central-difference ``nabla_{X_c} psi = X_c(psi) + A(X_c) psi`` on the interior.

    ``frame`` gives frame vectors as columns ``X[..., mu, a]`` (constant or
    per node); ``None`` means the coordinate frame.  Non-periodic axes lose
    one node at each end; a non-periodic axis with fewer than three nodes, or
    a frame direction pointing along an unsampled coordinate, raises
    :class:`BoundaryError`.
    """
    for k, (n, per) in enumerate(zip(psi.grid_shape, psi.periodic)):
        if not per and n < 3:
            raise BoundaryError(f"grid axis {k} has {n} nodes; central differences need 3")
    X = _trim(_frame_matrix(frame), psi, item_ndim=2)
    Xc = X[..., :, c]
    for mu in range(4):
        if mu not in psi.axes and mu not in psi.uniform_axes and np.any(Xc[..., mu] != 0):
            raise BoundaryError(f"frame direction X_{c} has a component along unsampled coordinate {mu}")
    out = np.zeros(_trim(psi.values, psi).shape, dtype=complex)
    for k, mu in enumerate(psi.axes):
        comp = Xc[..., mu]
        if np.all(comp == 0):
            continue
        out += np.asarray(comp)[..., None] * _partial(psi, k)
    if conn is not None:
        A = _trim(np.asarray(conn.matrices)[..., c, :, :], psi, item_ndim=2)
        out += np.einsum("...ij,...j->...i", A, _trim(psi.values, psi))
    return replace(psi.interior(), values=out)


def dirac(psi: SpinorField, frame=None, conn: Optional[LiftedConnection] = None, hbar_frame=None) -> SpinorField:
    """``D psi = sum_ab hbar^{ab} gamma_a nabla_{X_b} psi`` with frame-index ``hbar`` (default identity)."""
    hb = np.eye(4) if hbar_frame is None else np.asarray(hbar_frame, dtype=float)
    derivs = [covariant_derivative(psi, b, frame, conn).values for b in range(4)]
    out = np.zeros_like(derivs[0])
    for a in range(4):
        for b in range(4):
            if hb[a, b] != 0:
                out += hb[a, b] * np.einsum("ij,...j->...i", GAMMA[a], derivs[b])
    return replace(psi.interior(), values=out)


def _check_mass(m: float):
    if not (np.isfinite(m) and m > 0):
        raise InvalidMassError(f"mass must be positive, got {m}")


def ll_residual(psi: SpinorField, m: float, d_psi: SpinorField) -> SpinorField:
    """``D psi + 2 m i gamma0^T psi`` on the region covered by ``d_psi``."""
    _check_mass(m)
    base = psi.values if psi.values.shape == d_psi.values.shape else psi.interior().values
    mass = 2j * m * np.einsum("ij,...j->...i", GAMMA0_T, base)
    return replace(d_psi, values=d_psi.values + mass)


def ll_operator_exact(psi, dpsi, m: float, hbar_frame=None) -> np.ndarray:
    """Flat Levy-Leblond operator from exact derivatives.

    ``psi`` has shape ``(..., 4)`` and ``dpsi[a]`` is ``d_a psi`` for
    ``a = t, x, y, z``.
    """
    _check_mass(m)
    hb = np.eye(4) if hbar_frame is None else np.asarray(hbar_frame, dtype=float)
    psi = np.asarray(psi, dtype=complex)
    out = 2j * m * np.einsum("ij,...j->...i", GAMMA0_T, psi)
    for a in range(4):
        for b in range(4):
            if hb[a, b] != 0:
                out = out + hb[a, b] * np.einsum("ij,...j->...i", GAMMA[a], dpsi[b])
    return out
