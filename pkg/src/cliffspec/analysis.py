"""Clifford-valued function theory on the unit sphere S^{n-1}, n = 2 or 3.

Functions are evaluated on whole batches of points at once: an evaluator
takes an array of shape (N, n) and returns coefficients of shape (N, 2^n).
The inner product is <f1, f2> = int conj(f1) f2 dx with total mass one, so it
is right-linear in f2, and expansions over the V_m basis carry their
Clifford coefficients on the right: f = sum_m V_m <V_m, f>.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial

import numpy as np

from .clifford_core import (
    Multivector,
    _involution_signs,
    grades,
    product_arrays,
)
from .errors import DegeneracyError, QuadratureError
from .moebius import from_uw, sphere_nodes

MAX_ORDER = 8


# batched helpers -------------------------------------------------------------

def _embed(points, dim):
    out = np.zeros(points.shape[:-1] + (1 << dim,))
    for j in range(dim):
        out[..., 1 << j] = points[..., j]
    return out


def _vector_part(coeffs, dim):
    return np.stack([coeffs[..., 1 << j] for j in range(dim)], axis=-1)


def _conj(c, dim):
    return c * _involution_signs(dim)[1]


def _rev(c, dim):
    return c * _involution_signs(dim)[0]


def _ginv(c, dim):
    return c * _involution_signs(dim)[2]


def _tn_modulus_sq(c, dim):
    """Scalar part of c conj(c); equals |c|^2 for c in T(n)."""
    return product_arrays(c, _conj(c, dim), dim)[..., 0]


def _const(mv, count):
    return np.broadcast_to(mv.coeffs, (count, mv.coeffs.size))


# quadrature -------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    dim: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    degree: int

    @property
    def size(self):
        return len(self.weights)


@lru_cache(maxsize=None)
def sphere_rule(dim, size=None):
    """Trapezoid rule on the circle (size = node count, exact to degree size-1)
    or a Lebedev rule on S^2 (size = rule order)."""
    pts, wts = sphere_nodes(dim, size)
    if dim == 2:
        degree = len(wts) - 1
    else:
        degree = size or 29
    pts.setflags(write=False)
    wts.setflags(write=False)
    return QuadratureRule(dim, pts, wts, degree)


def default_rule(dim):
    return sphere_rule(dim, 256 if dim == 2 else 29)


# functions on the sphere -------------------------------------------------------

class SphereFunction:
    """Clifford-valued function on S^{n-1} given by a batched evaluator."""

    def __init__(self, dim, evaluator):
        self.dim = dim
        self._eval = evaluator
        self._cache = {}

    def __call__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.asarray(self._eval(pts), dtype=float)
        return np.broadcast_to(out, (pts.shape[0], 1 << self.dim))

    def at(self, x):
        return Multivector(self.dim, self(np.asarray(x, dtype=float)[None, :])[0])

    def samples(self, quad):
        key = id(quad)
        hit = self._cache.get(key)
        if hit is None or hit[0] is not quad:
            hit = (quad, np.array(self(quad.nodes)))
            self._cache[key] = hit
        return hit[1]

    @classmethod
    def constant(cls, mv):
        return cls(mv.dim, lambda p: _const(mv, len(p)))

    def __add__(self, other):
        return SphereFunction(self.dim, lambda p: self(p) + other(p))

    def __sub__(self, other):
        return SphereFunction(self.dim, lambda p: self(p) - other(p))

    def times(self, c):
        """Right multiplication by a constant multivector (or a real)."""
        if isinstance(c, Multivector):
            return SphereFunction(self.dim, lambda p: product_arrays(self(p), _const(c, len(p)), self.dim))
        return SphereFunction(self.dim, lambda p: self(p) * float(c))


def vacuum(dim):
    """f_0 = 1."""
    return SphereFunction.constant(Multivector.scalar(dim))


def inner_product(f1, f2, quad=None):
    quad = quad or default_rule(f1.dim)
    a = f1.samples(quad)
    b = f2.samples(quad)
    vals = product_arrays(_conj(a, f1.dim), b, f1.dim)
    return Multivector(f1.dim, quad.weights @ vals)


# the representation rho_1 --------------------------------------------------------

def _ab(g):
    M = from_uw(g)
    return M.a.coeffs, M.c.coeffs  # g = [[a, b'], [b, a']]


def _factor(a, b, pts, dim):
    """(a' - conj(x) b') / |a' - conj(x) b'|^n at each point."""
    X = _embed(pts, dim)
    k = _ginv(a, dim)[None, :] - product_arrays(_conj(X, dim), np.broadcast_to(_ginv(b, dim), X.shape), dim)
    mod2 = _tn_modulus_sq(k, dim)
    if np.any(mod2 <= 1e-24):
        raise DegeneracyError("kernel singularity on the sphere")
    return k / mod2[:, None] ** (dim / 2.0)


def _inverse_image(a, b, pts, dim):
    """g^{-1} x = (conj(a) x - conj(b)) (a* - b* x)^{-1}."""
    X = _embed(pts, dim)
    n = X.shape[0]
    num = product_arrays(np.broadcast_to(_conj(a, dim), X.shape), X, dim) - _conj(b, dim)
    den = _rev(a, dim) - product_arrays(np.broadcast_to(_rev(b, dim), X.shape), X, dim)
    d2 = _tn_modulus_sq(den, dim)
    y = product_arrays(num, _conj(den, dim), dim) / d2[:, None]
    del n
    return _vector_part(y, dim)


def rho1_apply(g, f):
    """rho_1(g) f (x) = F(g, x) f(g^{-1} x) with F = (a' - conj(x) b') / |.|^n."""
    dim = f.dim
    a, b = _ab(g)

    def ev(p):
        return product_arrays(_factor(a, b, p, dim), f(_inverse_image(a, b, p, dim)), dim)

    return SphereFunction(dim, ev)


def coherent_state(g):
    """f_g = rho_1(g) f_0 in closed form."""
    a, b = _ab(g)
    dim = g.dim
    return SphereFunction(dim, lambda p: _factor(a, b, p, dim))


def wavelet_transform(f, g, quad=None):
    """Wf(g) = <f_g, f>."""
    return inner_product(coherent_state(g), f, quad)


def vacuum_transform(g):
    """W f_0 (g) = w* (1 + u^2)^{(n-1)/2}, with u^2 = -|u|^2."""
    r2 = float(g.u @ g.u)
    return Multivector(g.dim, _rev(g.w.coeffs, g.dim) * (1.0 - r2) ** ((g.dim - 1) / 2.0))


def cauchy_margin(quad):
    if quad.dim == 2:
        return max(0.02, 25.0 / quad.size)
    return 0.25


def cauchy_integral(f, u, quad=None, margin=None):
    """Reduced wavelet transform: int (conj(x) - conj(u)) / |x - u|^n  x f(x) dx.

    This is the Clifford Cauchy integral; it reproduces left-monogenic f
    inside the ball.  margin guards against points too close to the sphere
    for the chosen grid.
    """
    dim = f.dim
    quad = quad or default_rule(dim)
    u = np.asarray(u, dtype=float)
    margin = cauchy_margin(quad) if margin is None else margin
    if np.linalg.norm(u) > 1.0 - margin:
        raise QuadratureError(
            f"|u| = {np.linalg.norm(u):.3g} is too close to the sphere for this grid (margin {margin:.3g})"
        )
    X = _embed(quad.nodes, dim)
    U = _embed(u[None, :], dim)
    diff = quad.nodes - u[None, :]
    kern = product_arrays(_conj(X - U, dim), X, dim) / np.linalg.norm(diff, axis=1)[:, None] ** dim
    vals = product_arrays(kern, f.samples(quad), dim)
    return Multivector(dim, quad.weights @ vals)


def complex_power(k):
    """z^k on the plane, z = x1 + x2 i read in Cl_2 with i = -e1e2.

    (x1 - x2 e1e2)^k is left-monogenic for the Cauchy kernel above, so these
    are the classical holomorphic powers in Clifford form.
    """

    def ev(p):
        z = (p[:, 0] + 1j * p[:, 1]) ** k
        out = np.zeros((p.shape[0], 4))
        out[:, 0] = z.real
        out[:, 3] = -z.imag
        return out

    return SphereFunction(2, ev)


def to_complex(m):
    """a + b i for the Cl_2 element a - b e1e2 (other grades ignored)."""
    return complex(m.coeffs[0], -m.coeffs[3])


# the V_m basis ------------------------------------------------------------------

def normalize_index(m, dim):
    """Return the full n-slot multi-index with m_1 = 0.

    Accepts an n-tuple (whose first slot must be 0) or an (n-1)-tuple for the
    hypercomplex variables j = 2..n.
    """
    m = tuple(int(v) for v in m)
    if len(m) == dim - 1:
        m = (0,) + m
    if len(m) != dim:
        raise ValueError(f"multi-index {m} has the wrong length for n = {dim}")
    if m[0] != 0:
        raise ValueError("slot m_1 carries no hypercomplex variable and must be 0")
    if any(v < 0 for v in m):
        raise ValueError("multi-index entries must be nonnegative")
    return m


def degree(m):
    return sum(m)


def indices_of_degree(dim, k):
    """All n-slot multi-indices (m_1 = 0) with |m| = k, in lexicographic order."""
    out = []
    for tail in itertools.product(range(k + 1), repeat=dim - 1):
        if sum(tail) == k:
            out.append((0,) + tuple(tail))
    return sorted(out, reverse=True)


def indices_up_to(dim, K):
    return [m for k in range(K + 1) for m in indices_of_degree(dim, k)]


def creation(m, j):
    """a_j^+ : V_m -> V_{m + e_j}."""
    m = list(m)
    m[j - 1] += 1
    return tuple(m)


def annihilation(m, j):
    """a_j^- : V_m -> m_j V_{m - e_j}; returns (index, weight), weight 0 when m_j = 0."""
    m = list(m)
    w = m[j - 1]
    if w == 0:
        return tuple(m), 0
    m[j - 1] -= 1
    return tuple(m), w


def fueter_variables(pts, dim):
    """zeta_j = x_j + x_1 e_1 e_j = e_1^{-1}(e_1 x_j - e_j x_1), j = 2..n.

    These are the left-monogenic hypercomplex variables reproduced by the
    Cauchy integral above.
    """
    out = []
    for j in range(2, dim + 1):
        c = np.zeros((pts.shape[0], 1 << dim))
        c[:, 0] = pts[:, j - 1]
        c[:, 1 | (1 << (j - 1))] = pts[:, 0]  # e_1 e_j
        out.append(c)
    return out


def symmetric_monomial(m, pts, dim):
    """Average over distinct orderings of the product of m_j copies of zeta_j."""
    m = normalize_index(m, dim)
    zs = fueter_variables(pts, dim)
    word = [j for j in range(2, dim + 1) for _ in range(m[j - 1])]
    res = np.zeros((pts.shape[0], 1 << dim))
    if not word:
        res[:, 0] = 1.0
        return res
    perms = set(itertools.permutations(word))
    for perm in perms:
        acc = zs[perm[0] - 2]
        for j in perm[1:]:
            acc = product_arrays(acc, zs[j - 2], dim)
        res += acc
    return res / len(perms)


def _gram_rule(dim):
    # exact for products of polynomials of degree <= MAX_ORDER
    return sphere_rule(dim, 64) if dim == 2 else sphere_rule(dim, 29)


@lru_cache(maxsize=None)
def _orthonormal_degree(dim, k):
    """Right-Clifford coefficients C with V_i = sum_j P_j C[j, i] orthonormal.

    P_j are the symmetric monomials of degree k.  Returns (indices, C) with C
    of shape (count, count, 2^n).
    """
    idx = indices_of_degree(dim, k)
    quad = _gram_rule(dim)
    P = [symmetric_monomial(m, quad.nodes, dim) for m in idx]
    w = quad.weights
    size = 1 << dim
    count = len(idx)
    coef = np.zeros((count, count, size))
    done = []  # samples of orthonormal V's
    for i in range(count):
        c = np.zeros((count, size))
        c[i, 0] = 1.0
        v = P[i].copy()
        for jj, Vj in enumerate(done):
            proj = w @ product_arrays(_conj(Vj, dim), v, dim)
            v = v - product_arrays(Vj, np.broadcast_to(proj, Vj.shape), dim)
            c = c - product_arrays(coef[:, jj, :], np.broadcast_to(proj, (count, size)), dim)
        nrm = w @ product_arrays(_conj(v, dim), v, dim)
        if np.max(np.abs(nrm[1:])) > 1e-10 * abs(nrm[0]) or nrm[0] <= 1e-14:
            raise DegeneracyError("V_m Gram-Schmidt produced a non-scalar norm")
        s = 1.0 / np.sqrt(nrm[0])
        coef[:, i, :] = c * s
        done.append(v * s)
    coef.setflags(write=False)
    return idx, coef


def v_basis(m, dim):
    """Orthonormal monogenic polynomial V_m on S^{n-1} (n = 2, 3; |m| <= 8)."""
    if dim not in (2, 3):
        raise ValueError("V_m basis is available for n = 2 and n = 3")
    m = normalize_index(m, dim)
    k = degree(m)
    if k > MAX_ORDER:
        raise ValueError(f"order {k} exceeds the supported maximum {MAX_ORDER}")
    idx, coef = _orthonormal_degree(dim, k)
    col = idx.index(m)

    def ev(p):
        out = np.zeros((p.shape[0], 1 << dim))
        for j, mj in enumerate(idx):
            cj = coef[j, col]
            if np.any(cj):
                out += product_arrays(symmetric_monomial(mj, p, dim), np.broadcast_to(cj, out.shape), dim)
        return out

    return SphereFunction(dim, ev)


def vm_chain(m):
    """Indices visited by V_m = (a_1^+)^{m_1} ... (a_n^+)^{m_n} f_0, starting at 0."""
    cur = tuple(0 for _ in m)
    chain = [cur]
    for j in range(len(m), 0, -1):
        for _ in range(m[j - 1]):
            cur = creation(cur, j)
            chain.append(cur)
    return chain


# tokens --------------------------------------------------------------------------

def token_coeff(k, m, g, quad=None):
    """W_{k,m}(g) = <V_m, rho_1(g) V_k>."""
    dim = g.dim
    quad = quad or default_rule(dim)
    return inner_product(v_basis(m, dim), rho1_apply(g, v_basis(k, dim)), quad)


def token_matrix(g, K, quad=None):
    """Array T[l, k] = W_{k,l}(g) for all |k|, |l| <= K.

    With this orientation T(g1 g2) = T(g1) T(g2) as Clifford-entry matrices,
    truncated at order K.  Returns (indices, T) with T of shape (B, B, 2^n).
    """
    dim = g.dim
    quad = quad or default_rule(dim)
    idx = indices_up_to(dim, K)
    basis = [v_basis(m, dim).samples(quad) for m in idx]
    a, b = _ab(g)
    F = _factor(a, b, quad.nodes, dim)
    pre = _inverse_image(a, b, quad.nodes, dim)
    shifted = [product_arrays(F, v_basis(m, dim)(pre), dim) for m in idx]
    B = len(idx)
    T = np.zeros((B, B, 1 << dim))
    for li in range(B):
        cl = _conj(basis[li], dim)
        for ki in range(B):
            T[li, ki] = quad.weights @ product_arrays(cl, shifted[ki], dim)
    return idx, T


def clifford_matmul(A, B, dim):
    """Matrix product of arrays of multivector coefficients, shapes (p, q, 2^n) x (q, r, 2^n)."""
    out = np.zeros((A.shape[0], B.shape[1], 1 << dim))
    for k in range(A.shape[1]):
        out += product_arrays(A[:, k, None, :], B[None, k, :, :], dim)
    return out


def cauchy_coefficients(g, K, quad=None):
    """W_m(g) = <V_m, f_g> for |m| <= K, as (indices, array (B, 2^n))."""
    dim = g.dim
    quad = quad or default_rule(dim)
    idx = indices_up_to(dim, K)
    fg = coherent_state(g)
    return idx, np.array([inner_product(v_basis(m, dim), fg, quad).coeffs for m in idx])


def multinomial(m):
    out = factorial(sum(m))
    for v in m:
        out //= factorial(v)
    return out


__all__ = [
    "complex_power",
    "to_complex",
    "QuadratureRule",
    "SphereFunction",
    "sphere_rule",
    "default_rule",
    "vacuum",
    "inner_product",
    "rho1_apply",
    "coherent_state",
    "wavelet_transform",
    "vacuum_transform",
    "cauchy_integral",
    "v_basis",
    "creation",
    "annihilation",
    "vm_chain",
    "token_coeff",
    "token_matrix",
    "cauchy_coefficients",
    "indices_of_degree",
    "indices_up_to",
    "normalize_index",
    "grades",
]
