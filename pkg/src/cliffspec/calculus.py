"""Operators with Clifford coefficients and the covariant functional calculus.

A CliffOperator is an element of A_n = Mat_d(R) (x) Cl_n, stored as one d x d
matrix per blade.  Module elements of M_n = R^d (x) Cl_n are stored as arrays
of shape (2^n, d).  Every inversion goes through the real regular
representation of size d 2^n with a condition-number gate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .analysis import (
    _orthonormal_degree,
    coherent_state,
    default_rule,
    indices_up_to,
    inner_product,
    normalize_index,
    token_matrix,
)
from .clifford_core import (
    Multivector,
    conjugation,
    left_matrix,
    reversion,
    sign_table,
)
from .errors import CliffspecError, InputError, NotInvertibleError
from .moebius import from_uw

COND_LIMIT = 1e12
MAX_WORD = 8


class ResolventSetError(NotInvertibleError):
    """The operator required by a Möbius action is not invertible."""


class DivergenceError(CliffspecError, ArithmeticError):
    def __init__(self, message, r_local=None):
        super().__init__(message)
        self.r_local = r_local


# data types -----------------------------------------------------------------

@dataclass(frozen=True)
class OperatorTuple:
    """n-tuple of real symmetric d x d matrices."""

    mats: tuple

    def __init__(self, mats, tol=1e-10, check=True):
        arrs = tuple(np.array(m, dtype=float) for m in mats)
        if not arrs:
            raise InputError("empty operator tuple")
        d = arrs[0].shape[0]
        for a in arrs:
            if a.shape != (d, d):
                raise InputError("all matrices must be square of the same size")
            if check and np.max(np.abs(a - a.T), initial=0.0) > tol * max(1.0, np.max(np.abs(a))):
                raise InputError("operator tuple entries must be symmetric")
            a.setflags(write=False)
        object.__setattr__(self, "mats", arrs)

    @property
    def n(self):
        return len(self.mats)

    @property
    def d(self):
        return self.mats[0].shape[0]

    def __iter__(self):
        return iter(self.mats)

    def __getitem__(self, j):
        return self.mats[j]

    def commutes(self, tol=1e-10):
        scale = max(1.0, max(np.linalg.norm(a, 2) for a in self.mats) ** 2)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                c = self.mats[i] @ self.mats[j] - self.mats[j] @ self.mats[i]
                if np.linalg.norm(c, 2) > tol * scale:
                    return False
        return True


class CliffOperator:
    """Element of Mat_d(R) (x) Cl_n."""

    __slots__ = ("dim", "d", "coeffs")

    def __init__(self, dim, d, coeffs=None):
        self.dim = dim
        self.d = d
        if coeffs is None:
            coeffs = np.zeros((1 << dim, d, d))
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.shape != (1 << dim, d, d):
            raise ValueError(f"expected coefficient shape {(1 << dim, d, d)}, got {coeffs.shape}")
        coeffs.setflags(write=False)
        self.coeffs = coeffs

    @classmethod
    def identity(cls, dim, d):
        c = np.zeros((1 << dim, d, d))
        c[0] = np.eye(d)
        return cls(dim, d, c)

    @classmethod
    def constant(cls, mv, d):
        """The Clifford number mv times the identity matrix."""
        return cls(mv.dim, d, mv.coeffs[:, None, None] * np.eye(d)[None])

    @classmethod
    def blade_matrix(cls, dim, mask, mat):
        mat = np.asarray(mat, dtype=float)
        c = np.zeros((1 << dim,) + mat.shape)
        c[mask] = mat
        return cls(dim, mat.shape[0], c)

    def __add__(self, other):
        other = _lift(other, self)
        return CliffOperator(self.dim, self.d, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        other = _lift(other, self)
        return CliffOperator(self.dim, self.d, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        other = _lift(other, self)
        return CliffOperator(self.dim, self.d, other.coeffs - self.coeffs)

    def __neg__(self):
        return CliffOperator(self.dim, self.d, -self.coeffs)

    def __mul__(self, other):
        if np.isscalar(other):
            return CliffOperator(self.dim, self.d, self.coeffs * float(other))
        return op_mul(self, _lift(other, self))

    def __rmul__(self, other):
        if np.isscalar(other):
            return CliffOperator(self.dim, self.d, self.coeffs * float(other))
        return op_mul(_lift(other, self), self)

    def __matmul__(self, other):
        return op_mul(self, other)

    def regular_matrix(self):
        """Real (d 2^n) x (d 2^n) matrix of left multiplication on M_n."""
        size = 1 << self.dim
        out = np.zeros((size * self.d, size * self.d))
        for p in range(size):
            if np.any(self.coeffs[p]):
                blade = np.zeros(size)
                blade[p] = 1.0
                out += np.kron(left_matrix(blade, self.dim), self.coeffs[p])
        return out

    def apply(self, vec):
        """Left action on a module element of shape (2^n, d)."""
        vec = np.asarray(vec, dtype=float)
        return (self.regular_matrix() @ vec.reshape(-1)).reshape(vec.shape)

    def vector_parts(self):
        return [self.coeffs[1 << j] for j in range(self.dim)]

    def norm(self):
        """Spectral norm of the regular representation (operator norm on M_n)."""
        return float(np.linalg.norm(self.regular_matrix(), 2))

    def allclose(self, other, tol=1e-10):
        return bool(np.max(np.abs(self.coeffs - other.coeffs)) <= tol)

    def __repr__(self):
        return f"CliffOperator(dim={self.dim}, d={self.d})"


def _lift(x, like):
    if isinstance(x, CliffOperator):
        if x.dim != like.dim or x.d != like.d:
            raise InputError("operator shapes differ")
        return x
    if isinstance(x, Multivector):
        return CliffOperator.constant(x, like.d)
    if np.isscalar(x):
        return CliffOperator.constant(Multivector.scalar(like.dim, float(x)), like.d)
    raise TypeError(f"cannot combine {type(x).__name__} with CliffOperator")


def module_vector(v, dim):
    """Embed a real d-vector into the scalar slot of M_n."""
    v = np.asarray(v, dtype=float)
    out = np.zeros((1 << dim, v.size))
    out[0] = v
    return out


def right_mul(stack, c, dim):
    """stack * c for a blade-indexed stack (leading axis 2^n) and a multivector c."""
    signs, xor = sign_table(dim)
    cc = c.coeffs if isinstance(c, Multivector) else np.asarray(c, dtype=float)
    out = np.zeros_like(np.asarray(stack, dtype=float))
    for q in np.flatnonzero(cc):
        for p in range(1 << dim):
            out[p ^ q] += signs[p, q] * cc[q] * stack[p]
    return out


# algebra ----------------------------------------------------------------------

def embed(t, dim=None):
    """A = e_1 A_1 + ... + e_n A_n."""
    dim = dim or t.n
    c = np.zeros((1 << dim, t.d, t.d))
    for j, a in enumerate(t.mats):
        c[1 << j] = a
    return CliffOperator(dim, t.d, c)


def op_mul(X, Y):
    if X.dim != Y.dim or X.d != Y.d:
        raise InputError("operator shapes differ")
    signs, xor = sign_table(X.dim)
    out = np.zeros_like(X.coeffs)
    px = np.flatnonzero(np.any(X.coeffs != 0, axis=(1, 2)))
    qy = np.flatnonzero(np.any(Y.coeffs != 0, axis=(1, 2)))
    for p in px:
        for q in qy:
            out[p ^ q] += signs[p, q] * (X.coeffs[p] @ Y.coeffs[q])
    return CliffOperator(X.dim, X.d, out)


def op_inverse(X, cond_limit=COND_LIMIT, tol=1e-8):
    """Inverse in A_n through the regular representation."""
    R = X.regular_matrix()
    if not np.all(np.isfinite(R)) or np.linalg.cond(R) > cond_limit:
        raise NotInvertibleError("operator is not invertible in A_n")
    size = 1 << X.dim
    rhs = np.zeros((size * X.d, X.d))
    rhs[: X.d] = np.eye(X.d)
    sol = np.linalg.solve(R, rhs).reshape(size, X.d, X.d)
    inv = CliffOperator(X.dim, X.d, sol)
    check = op_mul(X, inv)
    if not check.allclose(CliffOperator.identity(X.dim, X.d), tol * max(1.0, np.abs(sol).max())):
        raise NotInvertibleError("inverse failed the X X^{-1} = I check")
    return inv


def resolvent_membership(u, A, cond_limit=COND_LIMIT):
    """True when A - u I is invertible in A_n (u a real n-vector)."""
    u = np.asarray(u, dtype=float)
    shifted = A - _vector_const(u, A)
    try:
        op_inverse(shifted, cond_limit)
    except NotInvertibleError:
        return False
    return True


def _vector_const(u, A):
    c = np.zeros(1 << A.dim)
    for j, uj in enumerate(u):
        c[1 << j] = uj
    return CliffOperator.constant(Multivector(A.dim, c), A.d)


def clifford_spectrum_grid(A, grid=101, radius=0.99, cond_limit=COND_LIMIT):
    """Resolvent membership on a grid x grid square over [-radius, radius]^2 (n = 2).

    Returns (xs, ys, inside, member) where inside marks points of the closed
    disc of the given radius and member is True on the resolvent set.  Points
    outside the disc are reported as members.
    """
    if A.dim != 2:
        raise InputError("the resolvent grid is defined for pairs (n = 2)")
    # symmetric construction so that an odd grid contains 0.0 exactly
    xs = radius * (2.0 * np.arange(grid) - (grid - 1)) / max(grid - 1, 1)
    ys = xs.copy()
    base = A.regular_matrix()
    e1 = CliffOperator.constant(Multivector.basis_vector(2, 1), A.d).regular_matrix()
    e2 = CliffOperator.constant(Multivector.basis_vector(2, 2), A.d).regular_matrix()
    U1, U2 = np.meshgrid(xs, ys, indexing="ij")
    inside = U1 ** 2 + U2 ** 2 <= radius * radius + 1e-12
    mats = base[None, None] - U1[..., None, None] * e1 - U2[..., None, None] * e2
    sv = np.linalg.svd(mats, compute_uv=False)
    with np.errstate(divide="ignore"):
        cond = np.where(sv[..., -1] > 0, sv[..., 0] / np.where(sv[..., -1] > 0, sv[..., -1], 1.0), np.inf)
    member = (cond <= cond_limit) | ~inside
    return xs, ys, inside, member


# Möbius action on operators ---------------------------------------------------------

def _ab(g):
    M = from_uw(g)
    return M.a, M.c  # g = [[a, b'], [b, a']]


def _denominator(g, A):
    a, b = _ab(g)
    return CliffOperator.constant(reversion(a), A.d) - op_mul(CliffOperator.constant(reversion(b), A.d), A)


def resolvent(g, A):
    """R(g, A) = (a* I - b* A)^{-1}."""
    try:
        return op_inverse(_denominator(g, A))
    except NotInvertibleError as exc:
        raise ResolventSetError("a* I - b* A is not invertible: u_g is not in the resolvent set") from exc


def moebius_on_operator(g, A):
    """g^{-1} A = (conj(a) A - conj(b) I)(a* I - b* A)^{-1}."""
    a, b = _ab(g)
    num = op_mul(CliffOperator.constant(conjugation(a), A.d), A) - CliffOperator.constant(conjugation(b), A.d)
    return op_mul(num, resolvent(g, A))


def resolvent_cocycle_residual(g1, g2, A):
    """|| R(g1, A) R(g2, g1^{-1} A) - R(g1 g2, A) ||, max entry."""
    from .moebius import compose

    lhs = op_mul(resolvent(g1, A), resolvent(g2, moebius_on_operator(g1, A)))
    rhs = resolvent(compose(g1, g2), A)
    return float(np.max(np.abs(lhs.coeffs - rhs.coeffs)))


def moebius_difference_residual(g, A, x):
    """Residual of
    (conj a A - conj b)(a* I - b* A)^{-1} - (conj a x - conj b)(a* - b* x)^{-1}
        = (a - x* b)^{-1} (A - x I)(a* I - b* A)^{-1}.
    """
    from .clifford_core import geometric_product as gp
    from .clifford_core import mv_inverse, vector_embed

    a, b = _ab(g)
    X = vector_embed(np.asarray(x, dtype=float), A.dim)
    lhs_op = moebius_on_operator(g, A)
    try:
        scalar_den = mv_inverse(reversion(a) - gp(reversion(b), X))
    except NotInvertibleError as exc:
        raise ResolventSetError("a* - b* x is not invertible") from exc
    point = gp(gp(conjugation(a), X) - conjugation(b), scalar_den)
    lhs = lhs_op - CliffOperator.constant(point, A.d)
    try:
        left = mv_inverse(a - gp(reversion(X), b))
    except NotInvertibleError as exc:
        raise ResolventSetError("a - x* b is not invertible") from exc
    rhs = op_mul(
        op_mul(CliffOperator.constant(left, A.d), A - CliffOperator.constant(X, A.d)),
        resolvent(g, A),
    )
    return float(np.max(np.abs(lhs.coeffs - rhs.coeffs)))


def modulus_power(g, t, exponent=-2, tol=1e-10):
    """|a* I - b* A|^exponent for a commuting tuple and an even exponent.

    Uses |a* I - b* A|^{-2} = (|a|^2 - |b|^2 sum A_j^2)^{-1}.
    """
    if exponent % 2:
        raise NotImplementedError("odd powers need an operator square root; unsupported")
    if not t.commutes(tol):
        raise InputError("modulus_power requires pairwise commuting operators")
    M = from_uw(g)
    from .clifford_core import modulus

    a2 = modulus(M.a) ** 2
    b2 = modulus(M.c) ** 2
    base = a2 * np.eye(t.d) - b2 * sum(m @ m for m in t.mats)
    p = -exponent // 2
    if p >= 0:
        try:
            mat = np.linalg.matrix_power(np.linalg.inv(base), p)
        except np.linalg.LinAlgError as exc:
            raise NotInvertibleError("|a|^2 - |b|^2 sum A_j^2 is singular") from exc
    else:
        mat = np.linalg.matrix_power(base, -p)
    return CliffOperator.blade_matrix(t.n, 0, mat)


def _tuple_from_operator(A, tol=1e-8):
    """Recover the commuting tuple from a vector-valued orbit point."""
    size = 1 << A.dim
    others = [A.coeffs[p] for p in range(size) if bin(p).count("1") != 1]
    if others and max(np.max(np.abs(o)) for o in others) > tol * max(1.0, np.abs(A.coeffs).max()):
        raise InputError("orbit point is not of the form sum e_j B_j")
    return OperatorTuple(A.vector_parts(), tol=1e-6)


def rho_commuting(g, f):
    """(rho_A(g) f)(A) = R(g, A) |a* I - b* A|^{-n+2} f(g^{-1} A) for commuting tuples.

    f maps an orbit point (CliffOperator) to a module element or operator.
    """

    def shifted(A):
        val = f(moebius_on_operator(g, A))
        R = resolvent(g, A)
        if A.dim > 2:
            R = op_mul(R, modulus_power(g, _tuple_from_operator(A), -A.dim + 2))
        if isinstance(val, CliffOperator):
            return op_mul(R, val)
        return R.apply(val)

    return shifted


# symmetrised products -------------------------------------------------------------

def _multiset_words(counts):
    """Distinct arrangements of a multiset given as {letter: count}, depth first."""
    letters = sorted(counts)

    def rec(remaining, prefix):
        if not any(remaining.values()):
            yield tuple(prefix)
            return
        for ch in letters:
            if remaining[ch]:
                remaining[ch] -= 1
                prefix.append(ch)
                yield from rec(remaining, prefix)
                prefix.pop()
                remaining[ch] += 1

    yield from rec(dict(counts), [])


def _symmetrized(letters, m, dim, d):
    """Average of all distinct ordered products with m_j copies of letters[j]."""
    counts = {j: mj for j, mj in enumerate(m) if mj}
    total = sum(m)
    if total > MAX_WORD:
        raise InputError(f"order {total} exceeds the cap {MAX_WORD}")
    if total == 0:
        return CliffOperator.identity(dim, d)
    acc = np.zeros((1 << dim, d, d))
    count = 0
    # depth-first over the word tree, reusing prefix products
    stack = [(CliffOperator.identity(dim, d), dict(counts))]
    while stack:
        prod, rem = stack.pop()
        if not any(rem.values()):
            acc += prod.coeffs
            count += 1
            continue
        for j in sorted(rem, reverse=True):
            if rem[j]:
                nxt = dict(rem)
                nxt[j] -= 1
                stack.append((op_mul(prod, letters[j]), nxt))
    return CliffOperator(dim, d, acc / count)


def symmetric_product(t, m, dim=None):
    """A_m: average over distinct orderings of m_j copies of e_j A_j."""
    dim = dim or t.n
    m = tuple(int(v) for v in m)
    if len(m) != t.n or any(v < 0 for v in m):
        raise InputError(f"multi-index {m} does not fit an {t.n}-tuple")
    letters = [CliffOperator.blade_matrix(dim, 1 << j, a) for j, a in enumerate(t.mats)]
    return _symmetrized(letters, m, dim, t.d)


def fueter_operators(t):
    """Z_j = A_j + e_1 e_j A_1, the operator images of the Fueter variables (j = 2..n)."""
    n = t.n
    out = []
    for j in range(2, n + 1):
        c = np.zeros((1 << n, t.d, t.d))
        c[0] = t.mats[j - 1]
        c[1 | (1 << (j - 1))] = t.mats[0]
        out.append(CliffOperator(n, t.d, c))
    return out


def v_image(t, m):
    """Phi(V_m) = V_m(A): the orthonormal basis polynomial with x_j replaced by A_j."""
    n = t.n
    m = normalize_index(m, n)
    k = sum(m)
    idx, coef = _orthonormal_degree(n, k)
    col = idx.index(m)
    letters = [None] + fueter_operators(t)
    out = np.zeros((1 << n, t.d, t.d))
    for j, mj in enumerate(idx):
        cj = coef[j, col]
        if np.any(cj):
            P = _symmetrized(letters[1:], mj[1:], n, t.d) if k else CliffOperator.identity(n, t.d)
            out += right_mul(P.coeffs, cj, n)
    return CliffOperator(n, t.d, out)


# radii and the Taylor calculus ---------------------------------------------------------

def _indices_of_order(n, k):
    if n == 1:
        return [(k,)]
    out = []
    for first in range(k, -1, -1):
        for rest in _indices_of_order(n - 1, k - first):
            out.append((first,) + rest)
    return out


def spectral_radii(t, v, max_order=6):
    """Finite-order proxies for the symmetric and local joint spectral radii.

    Returns (r_S, r_L, trace) where trace lists (k, max ||A_m||^{1/k},
    max ||A_m v||^{1/k}) over |m| = k for k = 1..max_order, and the first two
    entries are the values at k = max_order.
    """
    vec = module_vector(v, t.n)
    trace = []
    for k in range(1, max_order + 1):
        rs = rl = 0.0
        for m in _indices_of_order(t.n, k):
            Am = symmetric_product(t, m)
            rs = max(rs, Am.norm() ** (1.0 / k))
            rl = max(rl, float(np.linalg.norm(Am.apply(vec))) ** (1.0 / k))
        trace.append((k, rs, rl))
    return trace[-1][1], trace[-1][2], trace


def taylor_calculus(t, v, coeffs, basis="symmetric", check_tail=False, tol=1e-10):
    """Phi(f) = sum_m Phi(V_m) v c_m with Clifford coefficients on the right.

    basis="symmetric": keys are n-slot multi-indices and Phi(V_m) = A_m (the
    symmetrised products).  basis="v": keys index the orthonormal V_m basis
    (slot m_1 = 0) and Phi(V_m) = V_m(A).  Values are Multivectors or reals.
    Returns a module element of shape (2^n, d).
    """
    n = t.n
    vec = module_vector(v, n)
    total = np.zeros_like(vec)
    by_degree = {}
    for m, c in coeffs.items():
        if basis == "symmetric":
            op = symmetric_product(t, m)
        elif basis == "v":
            op = v_image(t, m)
        else:
            raise InputError(f"unknown basis {basis!r}")
        cmv = c if isinstance(c, Multivector) else Multivector.scalar(n, float(c))
        term = right_mul(op.apply(vec), cmv, n)
        total += term
        k = sum(m)
        by_degree[k] = by_degree.get(k, 0.0) + term
    if check_tail and by_degree:
        top = max(by_degree)
        tail = float(np.linalg.norm(by_degree[top]))
        if tail > tol * max(1.0, float(np.linalg.norm(total))):
            _, r_l, _ = spectral_radii(t, v, min(top, 4) or 1)
            raise DivergenceError(
                f"partial sums are not settled (last degree contributes {tail:.3g})", r_local=r_l
            )
    return total


def rho_Av_apply(g, t, v, coeffs, K, quad=None, check=False, tol=1e-6):
    """Coefficient action d_l = sum_k W_{k,l}(g) c_k on the V_m basis, truncated at |m| <= K.

    t and v are accepted for symmetry with taylor_calculus; the action only
    touches coefficients.  With check=True the result is recomputed with
    K + 2 and a warning is issued when the two differ by more than tol.
    """
    n = g.dim
    idx, T = token_matrix(g, K, quad)
    out = _apply_tokens(idx, T, coeffs, n)
    if check:
        idx2, T2 = token_matrix(g, K + 2, quad)
        out2 = _apply_tokens(idx2, T2, coeffs, n)
        diff = max(
            (np.max(np.abs(out[m].coeffs - out2[m].coeffs)) for m in out),
            default=0.0,
        )
        if diff > tol:
            warnings.warn(f"token truncation at K = {K} leaves a residual of {diff:.3g}", RuntimeWarning)
    return out


def _apply_tokens(idx, T, coeffs, n):
    from .analysis import _const  # noqa: F401  (kept local to avoid a cycle at import time)
    from .clifford_core import product_arrays

    pos = {m: i for i, m in enumerate(idx)}
    c = np.zeros((len(idx), 1 << n))
    for m, val in coeffs.items():
        m = normalize_index(m, n)
        if m not in pos:
            raise InputError(f"coefficient index {m} exceeds the truncation order")
        c[pos[m]] = val.coeffs if isinstance(val, Multivector) else Multivector.scalar(n, float(val)).coeffs
    d = np.zeros_like(c)
    for li in range(len(idx)):
        d[li] = product_arrays(T[li], c, n).sum(axis=0)
    return {m: Multivector(n, d[i]) for i, m in enumerate(idx)}


def _coherent_parts(t, v, K, quad):
    from .analysis import v_basis

    n = t.n
    vec = module_vector(v, n)
    idx = indices_up_to(n, K)
    images = [v_image(t, m).apply(vec) for m in idx]
    conj_basis = [_conj_samples(v_basis(m, n).samples(quad), n) for m in idx]
    return images, conj_basis


def _conj_samples(samples, n):
    return samples * _conj_signs(n)


def _conj_signs(n):
    from .clifford_core import _involution_signs

    return _involution_signs(n)[1]


def _coherent_eval(g, parts, quad, n):
    from .clifford_core import product_arrays

    images, conj_basis = parts
    fg = coherent_state(g).samples(quad)
    total = np.zeros_like(images[0])
    for img, cb in zip(images, conj_basis):
        w_m = quad.weights @ product_arrays(cb, fg, n)
        total += right_mul(img, w_m, n)
    return total


def coherent_operator_state(g, t, v, K, quad=None):
    """E(g, A) = sum_m Phi(V_m) v W_m(g), W_m(g) = <V_m, f_g>, truncated at |m| <= K."""
    quad = quad or default_rule(t.n)
    return _coherent_eval(g, _coherent_parts(t, v, K, quad), quad, t.n)


def integral_formula(t, v, f, K, radii=(0.9, 0.99), u_nodes=32, x_nodes=2048, w_count=4):
    """Phi(f) from the integral formula H(E(g, A) Wf(g)), n = 2.

    f is a SphereFunction; Wf(g) = <f_g, f> and the coefficients W_m(g) of
    E(g, A) are computed by quadrature on the circle, the outer integral by
    the Hardy functional extrapolated to r = 1.  Returns (value, spread)
    where spread is the change between the two radii.
    """
    from .analysis import sphere_rule, wavelet_transform
    from .moebius import MoebElement, hardy_limit, rotation_nodes

    if t.n != 2:
        raise InputError("the integral formula check is implemented for n = 2")
    quad = sphere_rule(2, x_nodes)
    parts = _coherent_parts(t, v, K, quad)

    def integrand(u, w):
        g = MoebElement(u, w)
        E = _coherent_eval(g, parts, quad, 2)
        return right_mul(E, wavelet_transform(f, g, quad), 2)

    return hardy_limit(
        integrand, 2, radii, nodes=u_nodes, w_nodes=rotation_nodes(2, w_count), check=False
    )
