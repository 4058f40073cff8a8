"""Newton-Cartan tensor calculus at sampled space-time points.

Coordinates are ``(t, x, y, z)``.  Connection coefficients are stored as
``Gamma[k, l, m]`` = Gamma^k_{l m} where ``l`` is the differentiation
direction: ``nabla_l X^k = d_l X^k + Gamma^k_{l m} X^m``.  Frame-indexed
coefficients use the same layout, ``Gamma_frame[a, c, b] = e^a(nabla_{X_c} X_b)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateComplementError,
    IllConditionedError,
    InconsistentInputsError,
    InsufficientSamplesError,
    InvalidInputError,
    NotSo103ValuedError,
    StructuralError,
)
from .groups import So103Element

POINT_TOL = 1e-12
RANK_TOL = 1e-10
PIVOT_TOL = 1e-10
COND_LIMIT = 1e12
SO_TOL = 1e-10
ANALYTIC_STEP = 1e-3


@dataclass(frozen=True)
class NCPointData:
    g: np.ndarray
    tau: np.ndarray
    V: np.ndarray
    Gamma: np.ndarray = field(default_factory=lambda: np.zeros((4, 4, 4)))

    def __post_init__(self):
        for name, shape in (("g", (4, 4)), ("tau", (4,)), ("V", (4,)), ("Gamma", (4, 4, 4))):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise InvalidInputError(f"{name} must have shape {shape}, got {arr.shape}")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def flat(cls) -> "NCPointData":
        return cls(np.diag([0.0, 1.0, 1.0, 1.0]), np.array([1.0, 0, 0, 0]), np.array([1.0, 0, 0, 0]))


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "residual", float(self.residual))


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple
    torsion: float

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "torsion": self.torsion,
            "checks": {c.name: {"passed": c.passed, "residual": c.residual, "detail": c.detail}
                       for c in self.checks},
        }


def _ker_tau_basis(tau: np.ndarray) -> np.ndarray:
    # rows 1..3 of V^T from the SVD of tau span its kernel
    _, _, vt = np.linalg.svd(tau.reshape(1, 4))
    return vt[1:].T


def validate(data: NCPointData) -> ValidationReport:
    """Check every Newton-Cartan point invariant and report residuals (never raises)."""
    g, tau, V, Gam = data.g, data.tau, data.V, data.Gamma
    checks = []
    finite = all(np.all(np.isfinite(a)) for a in (g, tau, V, Gam))
    checks.append(Check("finite", finite, 0.0 if finite else float("inf")))
    if not finite:
        return ValidationReport(tuple(checks), float("nan"))

    scale = max(1.0, float(np.max(np.abs(g))))
    sym = float(np.max(np.abs(g - g.T)))
    checks.append(Check("g_symmetric", sym <= POINT_TOL * scale, sym))

    sv = np.linalg.svd(g, compute_uv=False)
    big = max(1.0, float(sv[0]))
    corank_ok = sv[3] <= RANK_TOL * big and sv[2] > RANK_TOL * big
    checks.append(Check("corank_one", bool(corank_ok), float(sv[3]),
                        "singular values " + ", ".join(f"{s:.3e}" for s in sv)))

    gv = float(np.max(np.abs(g @ V)))
    checks.append(Check("g_V_zero", gv <= POINT_TOL * scale * max(1.0, float(np.max(np.abs(V)))), gv))

    clock = abs(float(tau @ V) - 1.0)
    checks.append(Check("clock_normalized", clock <= POINT_TOL, clock, f"tau(V) = {float(tau @ V):.6g}"))

    eig = np.linalg.eigvalsh((g + g.T) / 2)
    psd = float(min(eig[0], 0.0))
    checks.append(Check("g_semidefinite", eig[0] >= -RANK_TOL * big, -psd))

    if np.linalg.norm(tau) > 0:
        B = _ker_tau_basis(tau)
        restr = np.linalg.eigvalsh(B.T @ ((g + g.T) / 2) @ B)
        checks.append(Check("g_definite_on_ker_tau", restr[0] > RANK_TOL * big, float(restr[0])))
    else:
        checks.append(Check("g_definite_on_ker_tau", False, 0.0, "tau is zero"))

    torsion = float(np.max(np.abs(Gam - Gam.transpose(0, 2, 1))))
    return ValidationReport(tuple(checks), torsion)


def random_point_data(rng: np.random.Generator, spread: float = 0.3) -> NCPointData:
    """Valid point data built from a random frame ``X`` (``X0 = V``) near the identity.

    With coframe ``e = X^-1`` the clock form is ``e^0`` and ``g = sum_i e^i (x) e^i``,
    so ``g V = 0`` and ``tau(V) = 1`` hold by construction.  Frames with
    condition number above 10 are redrawn.  ``Gamma`` is random.
    """
    X = np.eye(4) + spread * rng.normal(size=(4, 4))
    while np.linalg.cond(X) > 10:
        X = np.eye(4) + spread * rng.normal(size=(4, 4))
    e = np.linalg.inv(X)
    g = e[1:].T @ e[1:]
    return NCPointData((g + g.T) / 2, e[0], X[:, 0], rng.normal(size=(4, 4, 4)))


def gbar(g, tau) -> np.ndarray:
    """Non-degenerate completion ``tau (x) tau + g``."""
    g = np.asarray(g, dtype=float)
    tau = np.asarray(tau, dtype=float)
    out = np.outer(tau, tau) + g
    if not np.isfinite(np.linalg.cond(out)) or np.linalg.cond(out) > COND_LIMIT:
        raise InvalidInputError("tau (x) tau + g is singular; the Newton-Cartan data is invalid")
    return out


def hbar(gb) -> np.ndarray:
    gb = np.asarray(gb, dtype=float)
    cond = np.linalg.cond(gb)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedError(f"condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
    h = np.linalg.inv(gb)
    return (h + h.T) / 2


def hfield(V, hb, g=None, tau=None, tol: float = 1e-10) -> np.ndarray:
    """Degenerate contravariant metric ``hbar - V (x) V``.

    When ``g`` and ``tau`` are given, ``h g = 1 - V (x) tau`` is checked to
    ``tol``.  Nothing downstream of this module consumes ``h``; the Dirac
    operator raises indices with ``hbar``.
    """
    V = np.asarray(V, dtype=float)
    if not np.any(V):
        raise InvalidInputError("V must be non-zero")
    h = np.asarray(hb, dtype=float) - np.outer(V, V)
    if g is not None and tau is not None:
        resid = hfield_identity_residual(h, g, V, tau)
        if resid > tol:
            raise InconsistentInputsError(f"h g != 1 - V tau (residual {resid:.3e})")
    return h


def hfield_identity_residual(h, g, V, tau) -> float:
    return float(np.max(np.abs(np.asarray(h) @ np.asarray(g) - (np.eye(4) - np.outer(V, tau)))))


@dataclass(frozen=True)
class AdaptedFrame:
    """Frame vectors as columns ``X[:, a]`` and the dual coframe as rows ``e[a, :]``."""

    X: np.ndarray
    e: np.ndarray
    seed: tuple = (1, 2, 3)

    @classmethod
    def coordinate(cls) -> "AdaptedFrame":
        return cls(np.eye(4), np.eye(4))

    def residuals(self, data: NCPointData) -> dict:
        X, e = self.X, self.e
        return {
            "X0_is_V": float(np.max(np.abs(X[:, 0] - data.V))),
            "e0_is_tau": float(np.max(np.abs(e[0] - data.tau))),
            "tau_Xi": float(np.max(np.abs(data.tau @ X[:, 1:]))),
            "g_orthonormal": float(np.max(np.abs(X[:, 1:].T @ data.g @ X[:, 1:] - np.eye(3)))),
            "duality": float(np.max(np.abs(e @ X - np.eye(4)))),
        }

    def as_dict(self) -> dict:
        return {"X": self.X.tolist(), "e": self.e.tolist(), "seed": list(self.seed)}


def select_seed(data: NCPointData) -> tuple:
    """Indices of the three coordinate directions with the largest projections onto ker(tau).

    The projection of ``d_mu`` along ``V`` is ``u_mu = d_mu - tau_mu V``; since
    ``g V = 0`` its squared g-length is ``g_mu_mu``.  Ties keep index order.
    """
    lengths = np.diag(data.g)
    order = sorted(range(4), key=lambda mu: (-lengths[mu], mu))
    return tuple(sorted(order[:3]))


def adapted_frame(data: NCPointData, seed: Optional[Sequence[int]] = None) -> AdaptedFrame:
    """``X0 = V`` plus a g-orthonormal basis of ker(tau) by modified Gram-Schmidt."""
    g, tau, V = data.g, data.tau, data.V
    if seed is None:
        seed = select_seed(data)
    seed = tuple(seed)
    basis = []
    for mu in seed:
        u = -tau[mu] * V
        u[mu] += 1.0
        for w in basis:
            u = u - (w @ g @ u) * w
        norm2 = float(u @ g @ u)
        if norm2 < PIVOT_TOL:
            raise DegenerateComplementError(
                f"Gram-Schmidt pivot {norm2:.3e} on seed direction {mu} is below {PIVOT_TOL:.0e}"
            )
        basis.append(u / np.sqrt(norm2))
    X = np.column_stack([V] + basis)
    try:
        e = np.linalg.inv(X)
    except np.linalg.LinAlgError as exc:
        raise DegenerateComplementError("adapted frame is singular") from exc
    return AdaptedFrame(X, e, seed)


# --------------------------------------------------------------------------
# fields


class Polynomial:
    """Sparse polynomial in ``(t, x, y, z)`` stored as ``{exponents: coefficient}``."""

    def __init__(self, terms=()):
        self.terms = {}
        for coeff, exps in terms:
            exps = tuple(int(k) for k in exps)
            if len(exps) != 4 or min(exps) < 0:
                raise ValueError(f"exponents must be four non-negative integers, got {exps}")
            self.terms[exps] = self.terms.get(exps, 0.0) + float(coeff)

    def __call__(self, p) -> float:
        p = np.asarray(p, dtype=float)
        return float(sum(c * np.prod(p ** np.array(e)) for e, c in self.terms.items()))

    def diff(self, axis: int) -> "Polynomial":
        out = []
        for e, c in self.terms.items():
            if e[axis]:
                ne = list(e)
                ne[axis] -= 1
                out.append((c * e[axis], ne))
        return Polynomial(out)

    def integrate_time(self) -> "Polynomial":
        """Antiderivative in ``t`` vanishing at ``t = 0``."""
        out = []
        for e, c in self.terms.items():
            ne = list(e)
            ne[0] += 1
            out.append((c / ne[0], ne))
        return Polynomial(out)

    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.terms.values())

    def as_list(self) -> list:
        return [{"coefficient": c, "exponents": list(e)} for e, c in self.terms.items()]


# 0.5 x + 0.02 t^2 y: spatially uniform, time-dependent pull
DEFAULT_POTENTIAL = ((0.5, (0, 1, 0, 0)), (0.02, (2, 0, 1, 0)))


class NCField:
    """Newton-Cartan data as a function of the point."""

    kind = "abstract"
    default_step = ANALYTIC_STEP

    def at(self, point) -> NCPointData:
        raise NotImplementedError

    def stencil(self, point, axis: int, step: float):
        """Data at ``point -/+ step`` along ``axis`` and the actual half-width used."""
        p = np.asarray(point, dtype=float)
        d = np.zeros(4)
        d[axis] = step
        return self.at(p - d), self.at(p + d), step

    def sample_points(self) -> list:
        return [np.array(p) for p in itertools.product((0.0, 0.5, 1.0), repeat=4)]


class FlatField(NCField):
    kind = "flat"

    def at(self, point) -> NCPointData:
        return NCPointData.flat()


class NewtonianField(NCField):
    """Newtonian gravity ``Gamma^i_00 = d_i Phi`` for a polynomial potential.

    ``metric="comoving"`` (default) pairs the connection with the spatial
    metric ``sum_i (dx^i + u_i dt)^2`` and clock vector ``d_t - u . d_x``
    where ``u_i = int_0^t d_i Phi dt'``.  For spatially uniform fields this is
    exactly compatible (``nabla g = 0``, ``nabla tau = 0``); tidal fields leave
    a residual of order ``|d_i d_j Phi| t``.  ``metric="static"`` keeps
    ``g = diag(0,1,1,1)``, ``V = d_t``, which is incompatible whenever
    ``grad Phi != 0``.
    """

    kind = "newtonian"

    def __init__(self, potential=DEFAULT_POTENTIAL, metric: str = "comoving"):
        if metric not in ("comoving", "static"):
            raise ValueError(f"metric must be 'comoving' or 'static', got {metric!r}")
        self.potential = potential if isinstance(potential, Polynomial) else Polynomial(potential)
        self.metric = metric
        self.grad = [self.potential.diff(i) for i in (1, 2, 3)]
        self.velocity = [gi.integrate_time() for gi in self.grad]

    def at(self, point) -> NCPointData:
        p = np.asarray(point, dtype=float)
        Gam = np.zeros((4, 4, 4))
        for i, gi in enumerate(self.grad):
            Gam[i + 1, 0, 0] = gi(p)
        tau = np.array([1.0, 0.0, 0.0, 0.0])
        if self.metric == "static":
            return NCPointData(np.diag([0.0, 1.0, 1.0, 1.0]), tau, tau.copy(), Gam)
        u = np.array([ui(p) for ui in self.velocity])
        g = np.zeros((4, 4))
        g[0, 0] = u @ u
        g[0, 1:] = g[1:, 0] = u
        g[1:, 1:] = np.eye(3)
        V = np.concatenate(([1.0], -u))
        return NCPointData(g, tau, V, Gam)


class SampledField(NCField):
    """Newton-Cartan data on a regular ``(t, x, y, z)`` grid."""

    kind = "sampled"

    def __init__(self, shape, spacing, origin, g, tau, V, Gamma):
        self.shape = tuple(int(n) for n in shape)
        if len(self.shape) != 4 or min(self.shape) < 1:
            raise InvalidInputError(f"grid shape must be four positive integers, got {shape}")
        self.spacing = np.asarray(spacing, dtype=float).reshape(4)
        if np.any(self.spacing <= 0):
            raise InvalidInputError("grid spacings must be positive")
        self.origin = np.asarray(origin, dtype=float).reshape(4)
        self.g = np.asarray(g, dtype=float).reshape(self.shape + (4, 4))
        self.tau = np.asarray(tau, dtype=float).reshape(self.shape + (4,))
        self.V = np.asarray(V, dtype=float).reshape(self.shape + (4,))
        self.Gamma = np.asarray(Gamma, dtype=float).reshape(self.shape + (4, 4, 4))
        for arr in (self.g, self.tau, self.V, self.Gamma):
            arr.flags.writeable = False

    @property
    def default_step(self):
        return None

    def index_of(self, point) -> tuple:
        rel = (np.asarray(point, dtype=float) - self.origin) / self.spacing
        idx = np.rint(rel)
        if np.max(np.abs(rel - idx)) > 1e-9:
            raise InvalidInputError(f"point {np.asarray(point, dtype=float).tolist()} is not a grid node")
        idx = tuple(int(i) for i in idx)
        if any(i < 0 or i >= n for i, n in zip(idx, self.shape)):
            raise InvalidInputError(f"point {np.asarray(point, dtype=float).tolist()} lies outside the grid")
        return idx

    def node(self, idx) -> np.ndarray:
        return self.origin + np.asarray(idx) * self.spacing

    def at_index(self, idx) -> NCPointData:
        return NCPointData(self.g[idx], self.tau[idx], self.V[idx], self.Gamma[idx])

    def at(self, point) -> NCPointData:
        return self.at_index(self.index_of(point))

    def stencil(self, point, axis: int, step: Optional[float] = None):
        idx = list(self.index_of(point))
        h = self.spacing[axis]
        k = 1 if step is None else int(round(step / h))
        if k < 1 or abs(k * h - (step if step is not None else h)) > 1e-9 * h:
            raise InvalidInputError(f"fd step {step} is not a positive multiple of spacing {h}")
        if idx[axis] - k < 0 or idx[axis] + k >= self.shape[axis]:
            raise InsufficientSamplesError(
                f"central stencil of width {k} along axis {axis} leaves the grid at index {tuple(idx)}"
            )
        lo, hi = list(idx), list(idx)
        lo[axis] -= k
        hi[axis] += k
        return self.at_index(tuple(lo)), self.at_index(tuple(hi)), k * h

    def interior_indices(self, k: int = 1) -> list:
        if any(n < 2 * k + 1 for n in self.shape):
            raise InsufficientSamplesError(
                f"grid {self.shape} needs at least {2 * k + 1} nodes per axis for central differences"
            )
        ranges = [range(k, n - k) for n in self.shape]
        return list(itertools.product(*ranges))

    def sample_points(self) -> list:
        return [self.node(i) for i in self.interior_indices()]


def rotating_point_data(omega: float) -> Callable[[np.ndarray], NCPointData]:
    """Flat space-time in coordinates rotating about the z axis at angular velocity ``omega``.

    ``g = sum_i (dx^i + w^i dt)^2`` with ``w = omega (-y, x, 0)``, ``V = d_t - w``;
    the connection carries the centrifugal ``Gamma^i_00 = -omega^2 (x, y, 0)``
    and Coriolis ``Gamma^i_0j = Gamma^i_j0 = omega J_ij`` terms
    (``J = [[0, -1, 0], [1, 0, 0], [0, 0, 0]]``).
    """
    J = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])

    def at(point) -> NCPointData:
        x = np.asarray(point, dtype=float)[1:]
        w = omega * J @ x
        g = np.zeros((4, 4))
        g[0, 0] = w @ w
        g[0, 1:] = g[1:, 0] = w
        g[1:, 1:] = np.eye(3)
        Gam = np.zeros((4, 4, 4))
        Gam[1:, 0, 0] = omega**2 * (J @ J @ x)
        Gam[1:, 0, 1:] = omega * J
        Gam[1:, 1:, 0] = omega * J
        return NCPointData(g, np.array([1.0, 0, 0, 0]), np.concatenate(([1.0], -w)), Gam)

    return at


def sample_field(fn: Callable[[np.ndarray], NCPointData], shape, spacing, origin) -> SampledField:
    """Tabulate an analytic point function onto a grid."""
    shape = tuple(shape)
    spacing = np.asarray(spacing, dtype=float)
    origin = np.asarray(origin, dtype=float)
    g = np.empty(shape + (4, 4))
    tau = np.empty(shape + (4,))
    V = np.empty(shape + (4,))
    Gam = np.empty(shape + (4, 4, 4))
    for idx in np.ndindex(*shape):
        d = fn(origin + np.asarray(idx) * spacing)
        g[idx], tau[idx], V[idx], Gam[idx] = d.g, d.tau, d.V, d.Gamma
    return SampledField(shape, spacing, origin, g, tau, V, Gam)


# --------------------------------------------------------------------------
# compatibility and connection


@dataclass(frozen=True)
class CompatibilityResult:
    grad_g: float
    grad_tau: float
    points: int
    fd_step: Optional[float]

    @property
    def max(self) -> float:
        return max(self.grad_g, self.grad_tau)

    def as_dict(self) -> dict:
        return {"grad_g": self.grad_g, "grad_tau": self.grad_tau, "points": self.points,
                "fd_step": self.fd_step}


def covariant_metric_derivatives(field: NCField, point, fd_step=None):
    """Arrays ``(nabla_l g_mn, nabla_l tau_m)`` at one point."""
    d = field.at(point)
    dg = np.empty((4, 4, 4))
    dtau = np.empty((4, 4))
    for lam in range(4):
        lo, hi, h = field.stencil(point, lam, fd_step)
        dg[lam] = (hi.g - lo.g) / (2 * h)
        dtau[lam] = (hi.tau - lo.tau) / (2 * h)
    G = d.Gamma
    nabla_g = dg - np.einsum("klm,kn->lmn", G, d.g) - np.einsum("kln,mk->lmn", G, d.g)
    nabla_tau = dtau - np.einsum("klm,k->lm", G, d.tau)
    return nabla_g, nabla_tau


def compatibility_check(field: NCField, fd_step: Optional[float] = None, points=None) -> CompatibilityResult:
    """Max |nabla g| and |nabla tau| over the field's sample points (interior nodes when sampled)."""
    if fd_step is None:
        fd_step = field.default_step
    if points is None:
        points = field.sample_points()
    worst_g = worst_tau = 0.0
    for p in points:
        ng, nt = covariant_metric_derivatives(field, p, fd_step)
        worst_g = max(worst_g, float(np.max(np.abs(ng))))
        worst_tau = max(worst_tau, float(np.max(np.abs(nt))))
    return CompatibilityResult(worst_g, worst_tau, len(points), fd_step)


def frame_christoffels(field: NCField, point, frame: Optional[AdaptedFrame] = None, fd_step=None) -> np.ndarray:
    """``Gamma_frame[a, c, b] = e^a(nabla_{X_c} X_b)`` at ``point``.

    With ``frame=None`` the adapted frame field is used and its coordinate
    derivatives are taken by central differences (same Gram-Schmidt seed at
    every stencil node).  A frame passed explicitly is treated as constant.
    """
    if fd_step is None:
        fd_step = field.default_step
    data = field.at(point)
    if frame is None:
        frame = adapted_frame(data)
        dX = np.zeros((4, 4, 4))  # dX[mu, nu, b] = d_mu X_b^nu
        for mu in range(4):
            if not np.any(frame.X[mu]):
                continue
            lo, hi, h = field.stencil(point, mu, fd_step)
            dX[mu] = (adapted_frame(hi, frame.seed).X - adapted_frame(lo, frame.seed).X) / (2 * h)
    else:
        dX = np.zeros((4, 4, 4))
    X, e = frame.X, frame.e
    # (nabla_{X_c} X_b)^nu = X_c^mu d_mu X_b^nu + Gamma^nu_{mu k} X_c^mu X_b^k
    deriv = np.einsum("mc,mnb->ncb", X, dX) + np.einsum("nmk,mc,kb->ncb", data.Gamma, X, X)
    return np.einsum("an,ncb->acb", e, deriv)


@dataclass(frozen=True)
class ConnectionForm:
    """so(1,0,3) coefficients per frame direction ``c``.

    ``boost[c, i]`` is the coefficient on ``E_0(i+1)`` and ``rotation[c, k]``
    the coefficient on ``E_12, E_13, E_23`` for ``k = 0, 1, 2``.
    """

    boost: np.ndarray
    rotation: np.ndarray

    def direction(self, c: int) -> So103Element:
        return So103Element.from_coefficients(self.boost[c], self.rotation[c])

    def matrix(self, c: int) -> np.ndarray:
        return self.direction(c).matrix()

    def as_dict(self) -> dict:
        return {"boost": self.boost.tolist(), "rotation": self.rotation.tolist()}


def connection_form(gamma_frame, tol: float = SO_TOL) -> ConnectionForm:
    """Decompose ``omega^a_b(X_c) = Gamma_frame[a, c, b]`` onto the so(1,0,3) basis.

    Raises :class:`NotSo103ValuedError` when any direction has components
    outside so(1,0,3) larger than ``tol``; nothing is projected away.
    """
    gamma_frame = np.asarray(gamma_frame, dtype=float)
    boost = np.zeros((4, 3))
    rotation = np.zeros((4, 3))
    for c in range(4):
        try:
            el = So103Element.from_matrix(gamma_frame[:, c, :], tol=tol)
        except StructuralError as exc:
            raise NotSo103ValuedError(f"direction X_{c}: {exc}") from exc
        boost[c], rotation[c] = el.boost, el.rotation
    return ConnectionForm(boost, rotation)
