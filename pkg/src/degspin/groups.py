"""The Galilei group SO(1,0,3), its double cover SPIN(1,0,3) and their Lie algebras.

An element of SPIN(1,0,3) is the Clifford product ``s (1 + v f)`` with ``s``
a unit rotor of the Euclidean subalgebra on ``(e1, e2, e3)`` and ``v`` a
spatial vector.  Everything here is a frozen value object.

Matrix convention
-----------------
Galilei matrices act on columns with rows/columns ordered ``(f, e1, e2, e3)``
and have block form ``[[1, 2v], [0, rho(s)]]``; the Lie algebra map sends
``e_i e_j -> 2 E_ij`` and ``f e_i -> -2 E_0i``.  The literal conjugation
``x -> S x S^-1`` written in the column basis ``(f, e1, e2, e3)`` has top row
``-2v`` instead (see :func:`conjugation_matrix`); the two forms are related
by ``RADICAL_FLIP = diag(-1, 1, 1, 1)``, i.e. ``rho_prime`` reports the
radical coordinate along ``-f``.  Both are homomorphisms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import singledispatch
from itertools import combinations

import numpy as np

from .clifford import _REVERSE_SIGNS, DIM, ONE, Multivector, gp, gp_array
from .errors import InvalidElementError, StructuralError

UNIT_TOL = 1e-12
RENORM_TOL = 1e-9
BRACKET_TOL = 1e-12

PAIRS = ((0, 1), (0, 2), (1, 2))  # spatial index pairs (i<j), zero-based
_ROTOR_MASKS = (0, 6, 10, 12)  # 1, e1e2, e1e3, e2e3
_VECTOR_MASKS = (2, 4, 8)  # e1, e2, e3
_BOOST_MASKS = (3, 5, 9)  # fe1, fe2, fe3
_ROTOR_REVERSE = np.array([1.0, -1.0, -1.0, -1.0])

G_METRIC = np.diag([0.0, 1.0, 1.0, 1.0])
RADICAL_FLIP = np.diag([-1.0, 1.0, 1.0, 1.0])


def _spatial_vector(v) -> Multivector:
    c = np.zeros(DIM)
    c[list(_VECTOR_MASKS)] = v
    return Multivector(c)


@dataclass(frozen=True)
class Spin3Element:
    """Unit rotor ``a + b12 e1e2 + b13 e1e3 + b23 e2e3``."""

    a: float = 1.0
    b12: float = 0.0
    b13: float = 0.0
    b23: float = 0.0

    def __post_init__(self):
        comps = self.components
        if not np.all(np.isfinite(comps)):
            raise InvalidElementError("Spin3 components must be finite")
        drift = abs(float(comps @ comps) - 1.0)
        if drift > UNIT_TOL:
            raise InvalidElementError(f"Spin3 element is not unit (|norm^2 - 1| = {drift:.3e})")

    @classmethod
    def renormalized(cls, a, b12, b13, b23) -> "Spin3Element":
        """Build from slightly drifted components, rescaling when the drift is < 1e-9."""
        comps = np.array([a, b12, b13, b23], dtype=float)
        norm2 = float(comps @ comps)
        if abs(norm2 - 1.0) > RENORM_TOL:
            raise InvalidElementError(f"Spin3 drift {abs(norm2 - 1.0):.3e} too large to renormalize")
        comps = comps / np.sqrt(norm2)
        return cls(*map(float, comps))

    @classmethod
    def from_multivector(cls, m: Multivector) -> "Spin3Element":
        other = np.delete(m.coeffs, _ROTOR_MASKS)
        if np.max(np.abs(other)) > UNIT_TOL:
            raise InvalidElementError("multivector is not an even element of Cl(3)")
        return cls.renormalized(*(m.coeffs[k] for k in _ROTOR_MASKS))

    @classmethod
    def rotor(cls, plane: tuple[int, int], angle: float) -> "Spin3Element":
        """``cos(angle/2) + sin(angle/2) e_i e_j`` for 1-based plane ``(i, j)``, i < j."""
        i, j = plane
        k = PAIRS.index((i - 1, j - 1))
        comps = [np.cos(angle / 2), 0.0, 0.0, 0.0]
        comps[1 + k] = np.sin(angle / 2)
        return cls(*comps)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "Spin3Element":
        q = rng.normal(size=4)
        return cls.renormalized(*(q / np.linalg.norm(q)))

    @property
    def components(self) -> np.ndarray:
        return np.array([self.a, self.b12, self.b13, self.b23])

    def multivector(self) -> Multivector:
        c = np.zeros(DIM)
        c[list(_ROTOR_MASKS)] = self.components
        return Multivector(c)

    def inverse(self) -> "Spin3Element":
        # unit rotors: inverse == reverse
        return Spin3Element(self.a, -self.b12, -self.b13, -self.b23)

    def __mul__(self, other: "Spin3Element") -> "Spin3Element":
        if not isinstance(other, Spin3Element):
            return NotImplemented
        return Spin3Element.from_multivector(gp(self.multivector(), other.multivector()))

    def __neg__(self) -> "Spin3Element":
        return Spin3Element(-self.a, -self.b12, -self.b13, -self.b23)


def rho(s: Spin3Element) -> np.ndarray:
    """Rotation matrix of ``v -> s v s^-1``; column ``i`` is the image of ``e_i``."""
    if not isinstance(s, Spin3Element):
        raise InvalidElementError("rho expects a Spin3Element")
    return rho_array(s.components)


def _rotor_mv(s: np.ndarray) -> np.ndarray:
    out = np.zeros(s.shape[:-1] + (DIM,))
    out[..., list(_ROTOR_MASKS)] = s
    return out


def rho_array(s) -> np.ndarray:
    """Batched :func:`rho` for rotor components of shape ``(..., 4)``, via Clifford products."""
    s = np.asarray(s, dtype=float)
    smv = _rotor_mv(s)
    srev = smv * _REVERSE_SIGNS
    out = np.empty(s.shape[:-1] + (3, 3))
    for i, mask in enumerate(_VECTOR_MASKS):
        image = gp_array(smv, gp_array(_unit(mask), srev))
        out[..., :, i] = image[..., list(_VECTOR_MASKS)]
    return out


@dataclass(frozen=True)
class Spin103Element:
    """``s (1 + v f)`` with ``v = v1 e1 + v2 e2 + v3 e3``."""

    s: Spin3Element = field(default_factory=Spin3Element)
    v: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not isinstance(self.s, Spin3Element):
            raise InvalidElementError("s must be a Spin3Element")
        v = tuple(float(x) for x in self.v)
        if len(v) != 3 or not np.all(np.isfinite(v)):
            raise InvalidElementError("v must be three finite numbers")
        object.__setattr__(self, "v", v)

    @classmethod
    def identity(cls) -> "Spin103Element":
        return cls()

    @classmethod
    def random(cls, rng: np.random.Generator, scale: float = 1.0) -> "Spin103Element":
        return cls(Spin3Element.random(rng), tuple(scale * rng.normal(size=3)))

    @property
    def vec(self) -> np.ndarray:
        return np.array(self.v)

    def __mul__(self, other):
        if not isinstance(other, Spin103Element):
            return NotImplemented
        return spin_mul(self, other)

    def __neg__(self):
        return Spin103Element(-self.s, self.v)

    def inverse(self) -> "Spin103Element":
        return spin_inv(self)

    def multivector(self) -> Multivector:
        return embed(self)


def embed(el: Spin103Element) -> Multivector:
    """The multivector ``s (1 + v f)``."""
    vf = gp(_spatial_vector(el.v), Multivector(_unit(1)))
    return gp(el.s.multivector(), ONE + vf)


def _unit(mask: int) -> np.ndarray:
    c = np.zeros(DIM)
    c[mask] = 1.0
    return c


def embed_many(s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorised :func:`embed` for rotor components ``(n, 4)`` and vectors ``(n, 3)``."""
    s = np.asarray(s, dtype=float)
    v = np.asarray(v, dtype=float)
    smv = np.zeros(s.shape[:-1] + (DIM,))
    smv[..., list(_ROTOR_MASKS)] = s
    vmv = np.zeros(v.shape[:-1] + (DIM,))
    vmv[..., list(_VECTOR_MASKS)] = v
    one_plus_vf = gp_array(vmv, _unit(1))
    one_plus_vf[..., 0] += 1.0
    return gp_array(smv, one_plus_vf)


def rotor_mul_array(s1, s2) -> np.ndarray:
    """Batched rotor product on components ``(..., 4)``."""
    return gp_array(_rotor_mv(np.asarray(s1, float)), _rotor_mv(np.asarray(s2, float)))[..., list(_ROTOR_MASKS)]


def spin_mul_array(s1, v1, s2, v2):
    """Batched closed-form product; returns ``(s, v)`` component arrays."""
    s2_inv = np.asarray(s2, float) * _ROTOR_REVERSE
    v = np.asarray(v2, float) + np.einsum("...ij,...j->...i", rho_array(s2_inv), np.asarray(v1, float))
    return rotor_mul_array(s1, s2), v


def spin_inv_array(s, v):
    s = np.asarray(s, float)
    return s * _ROTOR_REVERSE, -np.einsum("...ij,...j->...i", rho_array(s), np.asarray(v, float))


def rho_prime_array(s, v) -> np.ndarray:
    """Batched Galilei matrices ``[[1, 2v], [0, rho(s)]]``, shape ``(..., 4, 4)``."""
    s = np.asarray(s, float)
    out = np.zeros(s.shape[:-1] + (4, 4))
    out[..., 0, 0] = 1.0
    out[..., 0, 1:] = 2.0 * np.asarray(v, float)
    out[..., 1:, 1:] = rho_array(s)
    return out


def spin_mul(x: Spin103Element, y: Spin103Element) -> Spin103Element:
    """Closed-form product ``s s' (1 + (v' + rho(s'^-1) v) f)``."""
    v = y.vec + rho(y.s.inverse()) @ x.vec
    return Spin103Element(x.s * y.s, tuple(v))


def spin_inv(x: Spin103Element) -> Spin103Element:
    return Spin103Element(x.s.inverse(), tuple(-(rho(x.s) @ x.vec)))


@dataclass(frozen=True)
class GalileiMatrix:
    """4x4 matrix ``[[1, A], [0, R]]`` in the ``(f, e1, e2, e3)`` ordering."""

    matrix: np.ndarray

    @classmethod
    def from_blocks(cls, A, R) -> "GalileiMatrix":
        m = np.eye(4)
        m[0, 1:] = A
        m[1:, 1:] = R
        return cls(m)

    @property
    def boost(self) -> np.ndarray:
        return self.matrix[0, 1:].copy()

    @property
    def rotation(self) -> np.ndarray:
        return self.matrix[1:, 1:].copy()

    def residuals(self) -> dict:
        m = self.matrix
        return {
            "metric": float(np.max(np.abs(m.T @ G_METRIC @ m - G_METRIC))),
            "det": float(abs(np.linalg.det(m) - 1.0)),
            "radical": float(np.max(np.abs(m[:, 0] - np.array([1.0, 0.0, 0.0, 0.0])))),
        }

    def is_valid(self, tol: float = 1e-12) -> bool:
        r = self.residuals()
        return r["radical"] == 0.0 and r["metric"] <= tol and r["det"] <= tol


def rho_prime(x: Spin103Element) -> GalileiMatrix:
    """Galilei matrix ``[[1, 2v], [0, rho(s)]]`` covering ``x``."""
    return GalileiMatrix.from_blocks(2.0 * x.vec, rho(x.s))


def conjugation_matrix(x: Spin103Element) -> np.ndarray:
    """Matrix of ``y -> x y x^-1`` on grade-1 elements, columns in the ``(f, e1, e2, e3)`` basis.

    Computed entirely with Clifford products; equals
    ``RADICAL_FLIP @ rho_prime(x).matrix @ RADICAL_FLIP``.
    """
    xm = embed(x)
    xinv = embed(spin_inv(x))
    masks = (1,) + _VECTOR_MASKS
    out = np.empty((4, 4))
    for col, mask in enumerate(masks):
        image = gp(xm, gp(Multivector(_unit(mask)), xinv))
        out[:, col] = image.coeffs[list(masks)]
    return out


@dataclass(frozen=True)
class So103Element:
    """``sum_i a_i E_0i + sum_{i<j} r_ij E_ij``; ``r`` is stored as an antisymmetric 3x3."""

    a: tuple = (0.0, 0.0, 0.0)
    r: tuple = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(3)
        r = np.asarray(self.r, dtype=float).reshape(3, 3)
        if np.any(r + r.T != 0.0):
            raise StructuralError("rotation block of an so(1,0,3) element must be antisymmetric")
        object.__setattr__(self, "a", tuple(a))
        object.__setattr__(self, "r", tuple(map(tuple, r)))

    @classmethod
    def from_coefficients(cls, boost=(0.0, 0.0, 0.0), rotation=(0.0, 0.0, 0.0)) -> "So103Element":
        """Build from coefficients on ``(E01, E02, E03)`` and ``(E12, E13, E23)``."""
        r = np.zeros((3, 3))
        for (i, j), w in zip(PAIRS, rotation):
            r[i, j], r[j, i] = w, -w
        return cls(tuple(boost), r)

    @classmethod
    def from_matrix(cls, phi, tol: float = BRACKET_TOL) -> "So103Element":
        """Decompose a 4x4 matrix; components outside so(1,0,3) above ``tol`` raise."""
        phi = np.asarray(phi, dtype=float)
        out = cls.from_coefficients(phi[0, 1:], [phi[i + 1, j + 1] for i, j in PAIRS])
        resid = float(np.max(np.abs(out.matrix() - phi)))
        if resid > tol:
            raise StructuralError(f"matrix leaves so(1,0,3) (residual {resid:.3e})")
        return out

    @property
    def boost(self) -> np.ndarray:
        return np.array(self.a)

    @property
    def rotation(self) -> np.ndarray:
        r = np.array(self.r)
        return np.array([r[i, j] for i, j in PAIRS])

    def matrix(self) -> np.ndarray:
        m = np.zeros((4, 4))
        m[0, 1:] = self.a
        m[1:, 1:] = self.r
        return m

    def __add__(self, other):
        return So103Element(self.boost + other.boost, np.array(self.r) + np.array(other.r))

    def __mul__(self, k):
        return So103Element(k * self.boost, k * np.array(self.r))

    __rmul__ = __mul__


def so103_basis() -> list[So103Element]:
    """``E01, E02, E03, E12, E13, E23``."""
    out = [So103Element.from_coefficients(boost=row) for row in np.eye(3)]
    out += [So103Element.from_coefficients(rotation=row) for row in np.eye(3)]
    return out


@dataclass(frozen=True)
class Spin103AlgebraElement:
    """``sum_i b_i f e_i + c12 e1e2 + c13 e1e3 + c23 e2e3``."""

    b: tuple = (0.0, 0.0, 0.0)
    c: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        object.__setattr__(self, "c", tuple(float(x) for x in self.c))

    @classmethod
    def from_multivector(cls, m: Multivector, tol: float = BRACKET_TOL) -> "Spin103AlgebraElement":
        keep = list(_BOOST_MASKS) + list(_ROTOR_MASKS[1:])
        resid = float(np.max(np.abs(np.delete(m.coeffs, keep))))
        if resid > tol:
            raise StructuralError(f"multivector leaves spin(1,0,3) (residual {resid:.3e})")
        return cls(m.coeffs[list(_BOOST_MASKS)], m.coeffs[list(_ROTOR_MASKS[1:])])

    def multivector(self) -> Multivector:
        out = np.zeros(DIM)
        out[list(_BOOST_MASKS)] = self.b
        out[list(_ROTOR_MASKS[1:])] = self.c
        return Multivector(out)

    def __add__(self, other):
        return Spin103AlgebraElement(np.add(self.b, other.b), np.add(self.c, other.c))

    def __mul__(self, k):
        return Spin103AlgebraElement(np.multiply(k, self.b), np.multiply(k, self.c))

    __rmul__ = __mul__


def spin103_basis() -> list[Spin103AlgebraElement]:
    """``fe1, fe2, fe3, e1e2, e1e3, e2e3``."""
    out = [Spin103AlgebraElement(b=row) for row in np.eye(3)]
    out += [Spin103AlgebraElement(c=row) for row in np.eye(3)]
    return out


def d_rho_prime(xi: Spin103AlgebraElement) -> So103Element:
    """Differential of the cover at the identity: ``e_i e_j -> 2 E_ij``, ``f e_i -> -2 E_0i``."""
    return So103Element.from_coefficients(
        boost=-2.0 * np.array(xi.b), rotation=2.0 * np.array(xi.c)
    )


def d_rho_prime_inv(phi: So103Element) -> Spin103AlgebraElement:
    return Spin103AlgebraElement(b=-0.5 * phi.boost, c=0.5 * phi.rotation)


@singledispatch
def lie_bracket(x, y):
    raise TypeError(f"no Lie bracket for {type(x).__name__}")


@lie_bracket.register
def _(x: So103Element, y: So103Element) -> So103Element:
    mx, my = x.matrix(), y.matrix()
    return So103Element.from_matrix(mx @ my - my @ mx)


@lie_bracket.register
def _(x: Spin103AlgebraElement, y: Spin103AlgebraElement) -> Spin103AlgebraElement:
    mx, my = x.multivector(), y.multivector()
    return Spin103AlgebraElement.from_multivector(gp(mx, my) - gp(my, mx))


def basis_pairs(basis):
    return list(combinations(range(len(basis)), 2))
