"""Blade arithmetic for the degenerate Clifford algebra Cl(1,0,3).

Generators are ordered ``(f, e1, e2, e3)`` with ``f`` on bit 0 of the blade
mask and ``e_i`` on bit ``i``.  ``f`` is null (``f*f == 0``); the ``e_i``
square to ``+1``.  A canonical blade is the product of its generators in
ascending bit order, so mask ``0b0011`` is ``f e1`` and ``0b0110`` is
``e1 e2``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Signature",
    "SIGNATURE",
    "DIM",
    "blade_mul",
    "blade_name",
    "grade_of",
    "Multivector",
    "gp",
    "gp_array",
    "grade_project",
    "reverse",
    "blade",
    "vector",
    "F",
    "E1",
    "E2",
    "E3",
    "ONE",
]

DIM = 16
GENERATOR_NAMES = ("f", "e1", "e2", "e3")


@dataclass(frozen=True)
class Signature:
    """Documentation record for the fixed signature; not consulted at runtime."""

    r: int = 1
    p: int = 0
    q: int = 3
    squares: tuple = (0, 1, 1, 1)
    generators: tuple = GENERATOR_NAMES


SIGNATURE = Signature()
_SQUARES = SIGNATURE.squares


def grade_of(mask: int) -> int:
    return bin(mask).count("1")


def blade_mul(a: int, b: int) -> tuple[int, int]:
    """Product of two canonical blades.

    Returns ``(sign, mask)`` with sign in {-1, 0, +1}.  The sign counts the
    transpositions needed to merge ``b`` into ``a``; a shared ``f`` kills the
    product and the result is reported as ``(0, 0)``.
    """
    if not (0 <= a < DIM and 0 <= b < DIM):
        raise ValueError(f"blade masks must lie in [0, {DIM}), got {a}, {b}")
    swaps = 0
    shifted = a >> 1
    while shifted:
        swaps += grade_of(shifted & b)
        shifted >>= 1
    sign = -1 if swaps & 1 else 1
    common = a & b
    for bit in range(4):
        if common >> bit & 1:
            sign *= _SQUARES[bit]
    if sign == 0:
        return 0, 0
    return sign, a ^ b


def blade_name(mask: int) -> str:
    if mask == 0:
        return "1"
    return "".join(GENERATOR_NAMES[i] for i in range(4) if mask >> i & 1)


_NAME_TOKEN = re.compile(r"f|e[123]")


def _parse_blade(name: str) -> tuple[int, int]:
    if name in ("", "1"):
        return 1, 0
    tokens = _NAME_TOKEN.findall(name)
    if "".join(tokens) != name:
        raise ValueError(f"not a blade name: {name!r}")
    sign, mask = 1, 0
    for tok in tokens:
        s, mask = blade_mul(mask, 1 << GENERATOR_NAMES.index(tok))
        sign *= s
    return sign, mask


# Cayley table: SIGN_TABLE[i, j] * e_{RESULT_TABLE[i, j]} == e_i e_j
SIGN_TABLE = np.zeros((DIM, DIM), dtype=np.int8)
RESULT_TABLE = np.zeros((DIM, DIM), dtype=np.int8)
for _i in range(DIM):
    for _j in range(DIM):
        SIGN_TABLE[_i, _j], RESULT_TABLE[_i, _j] = blade_mul(_i, _j)

# Flattened (i, j) -> k scatter matrix with the signs folded in.
_GP_MATRIX = np.zeros((DIM * DIM, DIM))
for _i in range(DIM):
    for _j in range(DIM):
        _GP_MATRIX[_i * DIM + _j, RESULT_TABLE[_i, _j]] = SIGN_TABLE[_i, _j]

GRADES = np.array([grade_of(m) for m in range(DIM)])
_REVERSE_SIGNS = np.array([(-1.0) ** (k * (k - 1) // 2) for k in GRADES])


def gp_array(a, b) -> np.ndarray:
    """Geometric product on raw coefficient arrays of shape ``(..., 16)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    outer = a[..., :, None] * b[..., None, :]
    return outer.reshape(outer.shape[:-2] + (DIM * DIM,)) @ _GP_MATRIX


Scalar = Union[int, float, np.floating, np.integer]


class Multivector:
    """Immutable element of Cl(1,0,3) stored as 16 real coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs=None):
        if coeffs is None:
            c = np.zeros(DIM)
        else:
            c = np.array(coeffs, dtype=float)
            if c.shape != (DIM,):
                raise ValueError(f"expected {DIM} coefficients, got shape {c.shape}")
            if not np.all(np.isfinite(c)):
                raise ValueError("multivector coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "_c", c)

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @classmethod
    def scalar(cls, value: float) -> "Multivector":
        c = np.zeros(DIM)
        c[0] = value
        return cls(c)

    def __getitem__(self, key) -> float:
        if isinstance(key, str):
            sign, mask = _parse_blade(key)
            return sign * float(self._c[mask])
        return float(self._c[key])

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Multivector(self._c + other._c)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Multivector(self._c - other._c)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Multivector(other._c - self._c)

    def __neg__(self):
        return Multivector(-self._c)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return gp(self, other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Multivector(self._c * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Multivector(self._c * other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Multivector(self._c / other)
        return NotImplemented

    def __eq__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return bool(np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def allclose(self, other, atol: float = 1e-12) -> bool:
        other = _coerce(other)
        return bool(np.max(np.abs(self._c - other._c)) <= atol)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._c)))

    def grade(self, k: int) -> "Multivector":
        return grade_project(self, k)

    def reverse(self) -> "Multivector":
        return reverse(self)

    def __repr__(self):
        terms = [
            f"{v:+.6g}*{blade_name(m)}" if m else f"{v:+.6g}"
            for m, v in enumerate(self._c)
            if v != 0
        ]
        return "Multivector(" + (" ".join(terms) if terms else "0") + ")"


def _coerce(x):
    if isinstance(x, Multivector):
        return x
    if isinstance(x, (int, float, np.floating, np.integer)):
        return Multivector.scalar(float(x))
    return None


def gp(a: Multivector, b: Multivector) -> Multivector:
    """Clifford (geometric) product."""
    a, b = _coerce(a), _coerce(b)
    return Multivector(gp_array(a.coeffs, b.coeffs))


def grade_project(a: Multivector, k: int) -> Multivector:
    if not 0 <= k <= 4:
        raise ValueError(f"grade must be in 0..4, got {k}")
    return Multivector(np.where(GRADES == k, a.coeffs, 0.0))


def reverse(a: Multivector) -> Multivector:
    return Multivector(a.coeffs * _REVERSE_SIGNS)


def blade(name: str, coeff: float = 1.0) -> Multivector:
    """Multivector ``coeff * name`` where ``name`` is a generator word like ``"e2e1"``.

    Words are reduced with the algebra's own product, so ``blade("e2e1")`` is
    ``-e1e2`` and ``blade("ff")`` is zero.
    """
    sign, mask = _parse_blade(name)
    c = np.zeros(DIM)
    c[mask] = sign * coeff
    return Multivector(c)


def vector(t: float = 0.0, x1: float = 0.0, x2: float = 0.0, x3: float = 0.0) -> Multivector:
    """Grade-1 element ``t f + x1 e1 + x2 e2 + x3 e3``."""
    c = np.zeros(DIM)
    c[1], c[2], c[4], c[8] = t, x1, x2, x3
    return Multivector(c)


VECTOR_MASKS = (1, 2, 4, 8)
ONE = Multivector.scalar(1.0)
F = blade("f")
E1 = blade("e1")
E2 = blade("e2")
E3 = blade("e3")
