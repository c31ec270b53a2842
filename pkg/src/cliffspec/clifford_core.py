"""Real Clifford algebra Cl_n with generators squaring to -1.

Elements are stored densely as 2^n real coefficients indexed by blade bitmask:
bit j of the mask is set when e_{j+1} is a factor of the blade.  The sign
convention is e_i e_j + e_j e_i = -2 delta_ij, so every generator squares to
-1.  Many geometric algebra libraries use +1; results here will differ from
theirs by signs on every even-grade product of repeated generators.
"""

from __future__ import annotations

import re
from functools import lru_cache

import numpy as np

from .errors import (
    DimensionMismatchError,
    NotInTnError,
    NotInvertibleError,
    SingularVectorError,
)

MAX_DIM = 8
DEFAULT_TOL = 1e-10


def _popcount(x):
    return bin(x).count("1")


def blade_sign(p, q):
    """Sign of e_p e_q, where p and q are blade masks."""
    swaps = 0
    bits = q
    while bits:
        low = bits & -bits
        # generators of p with a larger index than this factor of q
        swaps += _popcount(p & ~((low << 1) - 1))
        bits ^= low
    swaps += _popcount(p & q)
    return -1 if swaps & 1 else 1


@lru_cache(maxsize=None)
def sign_table(dim):
    """Return (signs, xor) arrays of shape (2^dim, 2^dim) for blade products."""
    size = 1 << dim
    idx = np.arange(size)
    xor = idx[:, None] ^ idx[None, :]
    signs = np.empty((size, size))
    for p in range(size):
        for q in range(size):
            signs[p, q] = blade_sign(p, q)
    signs.setflags(write=False)
    xor.setflags(write=False)
    return signs, xor


@lru_cache(maxsize=None)
def grades(dim):
    g = np.array([_popcount(m) for m in range(1 << dim)])
    g.setflags(write=False)
    return g


@lru_cache(maxsize=None)
def _involution_signs(dim):
    r = grades(dim)
    rev = np.where((r * (r - 1) // 2) % 2 == 0, 1.0, -1.0)
    conj = np.where((r * (r + 1) // 2) % 2 == 0, 1.0, -1.0)
    inv = np.where(r % 2 == 0, 1.0, -1.0)
    for arr in (rev, conj, inv):
        arr.setflags(write=False)
    return rev, conj, inv


@lru_cache(maxsize=None)
def _left_table(dim):
    # L(a)[k, q] = sign(k^q, q) * a[k^q], so that (a b)[k] = sum_q L[k, q] b[q]
    signs, xor = sign_table(dim)
    src = xor  # k ^ q
    sgn = signs[src, np.arange(1 << dim)[None, :]]
    sgn.setflags(write=False)
    return src, sgn


def left_matrix(coeffs, dim):
    """Left-regular representation of coefficient array(s) as 2^n x 2^n matrices.

    Works on a batch: coeffs of shape (..., 2^n) gives (..., 2^n, 2^n).
    """
    src, sgn = _left_table(dim)
    return np.asarray(coeffs)[..., src] * sgn


def product_arrays(a, b, dim):
    """Geometric product of coefficient arrays, broadcasting over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 1 and b.ndim == 1:
        src, sgn = _left_table(dim)
        return (a[src] * sgn) @ b
    return np.einsum("...kq,...q->...k", left_matrix(a, dim), b)


class Multivector:
    """Immutable element of Cl_dim."""

    __slots__ = ("dim", "coeffs")

    def __init__(self, dim, coeffs=None):
        if not 1 <= dim <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {dim}")
        size = 1 << dim
        if coeffs is None:
            arr = np.zeros(size)
        else:
            arr = np.array(coeffs, dtype=float)
            if arr.shape != (size,):
                raise ValueError(f"expected {size} coefficients, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    @classmethod
    def scalar(cls, dim, value=1.0):
        c = np.zeros(1 << dim)
        c[0] = value
        return cls(dim, c)

    @classmethod
    def blade(cls, dim, mask, value=1.0):
        c = np.zeros(1 << dim)
        c[mask] = value
        return cls(dim, c)

    @classmethod
    def basis_vector(cls, dim, i):
        """e_i for 1 <= i <= dim."""
        if not 1 <= i <= dim:
            raise ValueError(f"basis index {i} outside 1..{dim}")
        return cls.blade(dim, 1 << (i - 1))

    @property
    def scalar_part(self):
        return float(self.coeffs[0])

    def grade(self, r):
        c = np.where(grades(self.dim) == r, self.coeffs, 0.0)
        return Multivector(self.dim, c)

    def vector_part(self):
        """Components along e_1..e_n as a real array."""
        return np.array([self.coeffs[1 << j] for j in range(self.dim)])

    def _coerce(self, other):
        if isinstance(other, Multivector):
            if other.dim != self.dim:
                raise DimensionMismatchError(f"dimensions {self.dim} and {other.dim} differ")
            return other
        if np.isscalar(other):
            return Multivector.scalar(self.dim, float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Multivector(self.dim, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Multivector(self.dim, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Multivector(self.dim, other.coeffs - self.coeffs)

    def __neg__(self):
        return Multivector(self.dim, -self.coeffs)

    def __mul__(self, other):
        if np.isscalar(other):
            return Multivector(self.dim, self.coeffs * float(other))
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return Multivector(self.dim, self.coeffs * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if np.isscalar(other):
            return Multivector(self.dim, self.coeffs / float(other))
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.dim, self.coeffs.tobytes()))

    def allclose(self, other, tol=DEFAULT_TOL):
        other = self._coerce(other)
        return bool(np.max(np.abs(self.coeffs - other.coeffs)) <= tol)

    def norm(self):
        """Euclidean norm of the coefficient vector."""
        return float(np.linalg.norm(self.coeffs))

    def __repr__(self):
        return f"Multivector({self.dim}, {format_multivector(self)!r})"

    def __str__(self):
        return format_multivector(self)


def _check_dims(a, b):
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimensions {a.dim} and {b.dim} differ")


def geometric_product(a, b):
    _check_dims(a, b)
    return Multivector(a.dim, product_arrays(a.coeffs, b.coeffs, a.dim))


def reversion(a):
    """a*: reverses the order of generators in every blade."""
    return Multivector(a.dim, a.coeffs * _involution_signs(a.dim)[0])


def conjugation(a):
    """Clifford conjugation, the composition of reversion and grade involution."""
    return Multivector(a.dim, a.coeffs * _involution_signs(a.dim)[1])


def grade_involution(a):
    """a': flips the sign of odd grades."""
    return Multivector(a.dim, a.coeffs * _involution_signs(a.dim)[2])


def vector_embed(x, dim=None):
    x = np.asarray(x, dtype=float).ravel()
    if dim is None:
        dim = x.size
    if x.size != dim:
        raise DimensionMismatchError(f"vector of length {x.size} for dimension {dim}")
    c = np.zeros(1 << dim)
    for j in range(dim):
        c[1 << j] = x[j]
    return Multivector(dim, c)


@lru_cache(maxsize=None)
def _non_vector_mask(dim):
    m = grades(dim) != 1
    m.setflags(write=False)
    return m


def is_vector(a, tol=DEFAULT_TOL):
    off = a.coeffs[_non_vector_mask(a.dim)]
    return bool(off.size == 0 or np.max(np.abs(off)) <= tol)


def kelvin_inverse(x, tol=DEFAULT_TOL):
    """Inverse of a vector: conj(x) / |x|^2."""
    if not is_vector(x, tol):
        raise ValueError("kelvin_inverse expects a vector")
    v = x.vector_part()
    n2 = float(v @ v)
    if n2 <= tol:
        raise SingularVectorError("vector is too close to zero to invert")
    return conjugation(x) / n2


def mv_inverse(a, tol=DEFAULT_TOL):
    """General inverse through a linear solve with the left-regular matrix."""
    mat = left_matrix(a.coeffs, a.dim)
    if np.linalg.cond(mat) > 1.0 / tol:
        raise NotInvertibleError("multivector is not invertible")
    rhs = np.zeros(1 << a.dim)
    rhs[0] = 1.0
    return Multivector(a.dim, np.linalg.solve(mat, rhs))


def modulus(a, tol=DEFAULT_TOL):
    """|a| = sqrt(a conj(a)), defined when a conj(a) is a scalar."""
    sq = geometric_product(a, conjugation(a))
    s = sq.coeffs[0]
    rest = np.max(np.abs(sq.coeffs[1:])) if sq.coeffs.size > 1 else 0.0
    if rest > tol * max(1.0, abs(s)):
        raise NotInTnError("a * conj(a) has a non-scalar part")
    if s < -tol * max(1.0, abs(s)):
        raise NotInTnError("a * conj(a) is negative")
    return float(np.sqrt(max(s, 0.0)))


def in_gamma(a, tol=DEFAULT_TOL):
    """Twisted-adjoint test: a' e_i a^{-1} must be a vector for every e_i."""
    try:
        inv = mv_inverse(a, tol)
    except NotInvertibleError:
        return False
    ai = grade_involution(a)
    for i in range(1, a.dim + 1):
        img = geometric_product(geometric_product(ai, Multivector.basis_vector(a.dim, i)), inv)
        if not is_vector(img, tol * max(1.0, img.norm())):
            return False
    return True


def in_pin(a, tol=DEFAULT_TOL):
    if not in_gamma(a, tol):
        return False
    sq = geometric_product(a, conjugation(a))
    one = Multivector.scalar(a.dim)
    return sq.allclose(one, tol)


# text form -----------------------------------------------------------------

def _blade_name(mask):
    if mask == 0:
        return ""
    return "e" + "".join(str(j + 1) for j in range(MAX_DIM) if mask >> j & 1)


def _num(x):
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def format_multivector(a):
    """Text form such as ``3 + 2*e1 - e13``; parse_multivector inverts it exactly."""
    parts = []
    for mask, c in enumerate(a.coeffs):
        if c == 0.0:
            continue
        name = _blade_name(mask)
        mag = abs(float(c))
        if name and mag == 1.0:
            body = name
        elif name:
            body = f"{_num(mag)}*{name}"
        else:
            body = _num(mag)
        neg = c < 0 or (c == 0.0 and np.signbit(c))
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts) if parts else "0"


_TERM = re.compile(
    r"\s*([+-])?\s*(?:((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|inf|nan)\s*(\*)?\s*)?(e\d+)?\s*"
)


def parse_multivector(text, dim):
    """Parse the text form produced by format_multivector."""
    coeffs = np.zeros(1 << dim)
    s = text.strip()
    if not s:
        raise ValueError("empty multivector text")
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse multivector near {s[pos:]!r}")
        sign, num, star, blade = m.groups()
        if num is None and blade is None:
            raise ValueError(f"cannot parse multivector near {s[pos:]!r}")
        if sign is None and not first:
            raise ValueError(f"missing operator before {s[pos:]!r}")
        if star and blade is None:
            raise ValueError(f"dangling '*' in {text!r}")
        if num is not None and blade is not None and not star:
            raise ValueError(f"missing '*' between coefficient and blade in {text!r}")
        value = float(num) if num is not None else 1.0
        if sign == "-":
            value = -value
        mask = 0
        if blade is not None:
            idx = [int(ch) for ch in blade[1:]]
            if any(i < 1 or i > dim for i in idx) or len(set(idx)) != len(idx):
                raise ValueError(f"invalid blade {blade} for dimension {dim}")
            if idx != sorted(idx):
                raise ValueError(f"blade indices must be ascending: {blade}")
            for i in idx:
                mask |= 1 << (i - 1)
        coeffs[mask] += value
        pos = m.end()
        first = False
    return Multivector(dim, coeffs)


def to_blade_map(a):
    """Dictionary {blade name: coefficient} with '1' for the scalar part."""
    return {(_blade_name(m) or "1"): float(c) for m, c in enumerate(a.coeffs) if c != 0.0}


def from_blade_map(data, dim):
    coeffs = np.zeros(1 << dim)
    for key, val in data.items():
        mv = parse_multivector("1" if key == "1" else key, dim)
        mask = int(np.flatnonzero(mv.coeffs)[0])
        coeffs[mask] += float(val)
    return Multivector(dim, coeffs)
