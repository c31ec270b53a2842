"""Jet-labelled joint spectrum of a pair of symmetric matrices.

For n = 2 the product e1 e2 plays the role of the imaginary unit and the
monogenic calculus of (A1, A2) becomes the holomorphic calculus of the
complex matrix A1 + i A2.  Its spectrum is the multiset of pairs (u, k):
an eigenvalue u together with a jet order k, one point for every level of
every Jordan block.  This module computes that structure numerically,
maps it through holomorphic functions and checks the result against an
independent matrix-function evaluation.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.cluster.hierarchy import linkage, to_tree
from scipy.spatial.distance import pdist
from scipy.linalg import lapack
from scipy.optimize import linear_sum_assignment

from .errors import AmbiguityError, DegeneracyError, InputError, MapDegeneracyError

DEFAULT_RANK_TOL = 1e-8
DEFAULT_DERIV_TOL = 1e-9
GAP_RATIO = 10.0
SIMILARITY_COND_LIMIT = 1e8
_EPS = np.finfo(float).eps


# complex matrices ------------------------------------------------------------------

def complexify(t):
    """A1 + i A2 for a pair (OperatorTuple or sequence of two real matrices)."""
    mats = list(getattr(t, "mats", t))
    if len(mats) != 2:
        raise InputError(f"complexification needs a pair of matrices, got {len(mats)}")
    a1, a2 = (np.asarray(m, dtype=float) for m in mats)
    if a1.shape != a2.shape or a1.ndim != 2 or a1.shape[0] != a1.shape[1]:
        raise InputError("the pair must consist of square matrices of equal size")
    return a1 + 1j * a2


def _as_matrix(M):
    if hasattr(M, "mats"):
        M = complexify(M)
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError("expected a square matrix")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix entries must be finite")
    return M


def jordan_block(lam, size):
    J = np.diag(np.full(size, complex(lam)))
    if size > 1:
        J += np.diag(np.ones(size - 1), 1)
    return J


def jordan_matrix(blocks):
    """Direct sum of Jordan blocks given as (eigenvalue, length) pairs."""
    return scipy.linalg.block_diag(*[jordan_block(lam, L) for lam, L in blocks])


# Jordan structure ----------------------------------------------------------------------

@dataclass(frozen=True)
class JordanStructure:
    """Clusters (eigenvalue, block sizes in descending order)."""

    clusters: tuple

    @property
    def size(self):
        return sum(sum(s) for _, s in self.clusters)

    def sizes_at(self, lam, tol=1e-6):
        return [s for mu, s in self.clusters if abs(mu - lam) <= tol]

    def matches(self, other, tol=1e-6):
        if len(self.clusters) != len(other.clusters):
            return False
        used = set()
        for lam, sizes in self.clusters:
            hit = None
            for j, (mu, s2) in enumerate(other.clusters):
                if j not in used and abs(lam - mu) <= tol and tuple(s2) == tuple(sizes):
                    hit = j
                    break
            if hit is None:
                return False
            used.add(hit)
        return True


@dataclass
class _Analysis:
    M: np.ndarray
    T: np.ndarray
    Z: np.ndarray
    eigs: np.ndarray
    groups: list
    lams: list
    sizes: list
    scale: float
    cluster_tol: float
    rank_tol: float


def _scale(M):
    return max(1.0, float(np.linalg.norm(M, 2)))


def _reorder(T, Z, members, job="N"):
    select = np.zeros(T.shape[0], dtype=np.int32)
    select[list(members)] = 1
    ts, qs, _, m, s, _, info = lapack.ztrsen(select, T, Z, job=job, lwork=max(1, T.shape[0] ** 2))
    if info != 0 or m != len(members):
        raise AmbiguityError("Schur reordering failed; the eigenvalue clusters are too close to swap")
    return ts, qs, s


def _rank(X, thresh):
    if X.size == 0:
        return 0
    sv = np.linalg.svd(X, compute_uv=False)
    return int(np.sum(sv > thresh))


def _weyr_sizes(N, scale, rank_tol):
    """Block sizes of a nilpotent N from the rank staircase, or None if inconsistent."""
    mu = N.shape[0]
    ranks = [mu]
    P = np.eye(mu, dtype=complex)
    for j in range(1, mu + 1):
        P = P @ N
        ranks.append(_rank(P, rank_tol * scale**j))
    if ranks[-1] != 0:
        return None
    w = [ranks[j - 1] - ranks[j] for j in range(1, mu + 1)] + [0]
    if any(w[j] < w[j + 1] for j in range(mu)):
        return None
    sizes = []
    for j in range(mu, 0, -1):
        sizes += [j] * (w[j - 1] - w[j])
    return sizes if sum(sizes) == mu else None


def _validate(T, Z, members, scale, rank_tol):
    """(mean eigenvalue, block sizes or None, reciprocal condition of the mean)."""
    mu = len(members)
    ts, _, s = _reorder(T, Z, members, job="E") if mu < T.shape[0] else (T, Z, 1.0)
    T11 = ts[:mu, :mu]
    lam = complex(np.trace(T11) / mu)
    if mu == 1:
        return lam, [1], s
    N = T11 - lam * np.eye(mu)
    if np.linalg.norm(np.linalg.matrix_power(N, mu), 2) > rank_tol * scale**mu:
        return lam, None, s
    return lam, _weyr_sizes(N, scale, rank_tol), s


def _analyse(M, cluster_tol=None, rank_tol=None):
    M = _as_matrix(M)
    d = M.shape[0]
    scale = _scale(M)
    rank_tol = DEFAULT_RANK_TOL if rank_tol is None else float(rank_tol)
    if cluster_tol is None:
        cluster_tol = 1e-7 * float(np.linalg.norm(M, 2))
    if rank_tol <= 0 or cluster_tol < 0:
        raise InputError("tolerances must be positive")
    if d == 0:
        return _Analysis(M, M, M, np.zeros(0), [], [], [], scale, cluster_tol, rank_tol)
    T, Z = scipy.linalg.schur(M, output="complex")
    eigs = np.diag(T).copy()
    groups, lams, sizes, conds = [], [], [], []

    def accept(members, lam, sz, s):
        groups.append(sorted(members))
        lams.append(lam)
        sizes.append(sz)
        conds.append(s)

    if d == 1:
        accept([0], complex(eigs[0]), [1], 1.0)
    else:
        pts = np.column_stack([eigs.real, eigs.imag])
        root = to_tree(linkage(pdist(pts), method="single"))

        def height(node):
            return 0.0 if node.is_leaf() else float(node.dist)

        def visit(node):
            members = node.pre_order()
            h = height(node)
            lam, sz, s = _validate(T, Z, members, scale, rank_tol)
            if sz is not None:
                accept(members, lam, sz, s)
                return
            if h <= cluster_tol:
                raise AmbiguityError(
                    f"eigenvalues {np.round(eigs[members], 12).tolist()} lie within cluster_tol but their "
                    f"rank staircase is inconsistent; candidate clusterings: one cluster {[members]} or split "
                    f"{[node.left.pre_order(), node.right.pre_order()]}"
                )
            visit(node.left)
            visit(node.right)

        visit(root)

    _gap_guard(eigs, groups, lams, conds, cluster_tol, scale)
    return _Analysis(M, T, Z, eigs, groups, lams, sizes, scale, cluster_tol, rank_tol)


def _gap_guard(eigs, groups, lams, conds, cluster_tol, scale):
    if len(groups) < 2:
        return
    for i, (g, lam) in enumerate(zip(groups, lams)):
        # first-order sensitivity of the cluster mean bounds its spread from below
        sens = 1e3 * _EPS * scale / max(conds[i], 1e-300)
        spread = max(cluster_tol, sens, float(np.max(np.abs(eigs[g] - lam))))
        others = np.concatenate([eigs[h] for j, h in enumerate(groups) if j != i])
        gap = float(np.min(np.abs(others - lam)))
        if gap < GAP_RATIO * spread:
            raise AmbiguityError(
                f"cluster at {lam:.6g} has spread {spread:.3g} but its nearest neighbour is {gap:.3g} away; "
                f"candidate clusterings: separate {[sorted(g)]} or merge it with its neighbour"
            )


def _canonical(lams, sizes):
    order = sorted(range(len(lams)), key=lambda i: (round(lams[i].real, 9), round(lams[i].imag, 9)))
    return tuple((lams[i], tuple(sorted(sizes[i], reverse=True))) for i in order)


def jordan_structure(M, cluster_tol=None, rank_tol=None):
    """Eigenvalue clusters of M and their Jordan block sizes.

    Eigenvalues are grouped by a single-linkage tree read from the top: a
    group is accepted once the restriction of M to its invariant subspace,
    minus the mean eigenvalue, passes as nilpotent with a consistent rank
    staircase.  Block sizes come from #blocks of size >= j =
    rank(N^{j-1}) - rank(N^j).
    """
    an = _analyse(M, cluster_tol, rank_tol)
    return JordanStructure(_canonical(an.lams, an.sizes))


# joint spectrum -------------------------------------------------------------------------

def _key(u):
    return (round(u.real, 9), round(u.imag, 9))


@dataclass(frozen=True)
class JointSpectrum:
    """Multiset of (u, k): eigenvalue and jet order."""

    points: tuple = field(default_factory=tuple)

    def __post_init__(self):
        pts = tuple(sorted(((complex(u), int(k)) for u, k in self.points), key=lambda p: (_key(p[0]), p[1])))
        if any(k < 0 for _, k in pts):
            raise InputError("jet orders must be nonnegative")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @classmethod
    def from_structure(cls, js):
        pts = []
        for lam, sizes in js.clusters:
            for L in sizes:
                pts += [(lam, k) for k in range(L)]
        return cls(tuple(pts))

    def sites(self):
        """Distinct eigenvalues with their order counts {u: [#k=0, #k=1, ...]}."""
        out = {}
        for u, k in self.points:
            c = out.setdefault(u, [])
            while len(c) <= k:
                c.append(0)
            c[k] += 1
        return out

    @property
    def classical(self):
        return sorted(self.sites(), key=_key)

    def heights(self):
        return {u: len(c) for u, c in self.sites().items()}

    def blocks(self):
        """Jordan sizes per site, read off as the conjugate partition of the level counts."""
        out = []
        for u in self.classical:
            c = self.sites()[u]
            if any(c[k] < c[k + 1] for k in range(len(c) - 1)) or 0 in c:
                raise InputError(f"jet orders at {u} do not form a staircase: counts {c}")
            sizes = [sum(1 for ck in c if ck > b) for b in range(c[0])]
            out.append((u, sorted(sizes, reverse=True)))
        return out

    def to_json(self):
        return {
            "points": [{"u": [u.real, u.imag], "k": k} for u, k in self.points],
            "blocks": [{"lambda": [u.real, u.imag], "sizes": s} for u, s in self.blocks()],
        }

    @classmethod
    def from_json(cls, data):
        try:
            pts = [(complex(p["u"][0], p["u"][1]), int(p["k"])) for p in data["points"]]
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise InputError(f"malformed spectrum document: {exc}") from exc
        return cls(tuple(pts))


def joint_spectrum(t, cluster_tol=None, rank_tol=None):
    """Jet-labelled spectrum of a pair (or of an already complexified matrix)."""
    return JointSpectrum.from_structure(jordan_structure(_as_matrix(t), cluster_tol, rank_tol))


def match_spectra(s1, s2, tol=1e-6):
    """Multiset comparison: (equal, max distance between matched points).

    Points are matched within each jet order by minimal total distance.
    """
    by1, by2 = {}, {}
    for u, k in s1.points:
        by1.setdefault(k, []).append(u)
    for u, k in s2.points:
        by2.setdefault(k, []).append(u)
    if {k: len(v) for k, v in by1.items()} != {k: len(v) for k, v in by2.items()}:
        return False, math.inf
    worst = 0.0
    for k, a in by1.items():
        a = np.array(a)
        b = np.array(by2[k])
        cost = np.abs(a[:, None] - b[None, :])
        r, c = linear_sum_assignment(cost)
        worst = max(worst, float(cost[r, c].max()))
    return worst <= tol, worst


# holomorphic maps -------------------------------------------------------------------------

def _taylor_shift(coeffs, u, order):
    """Taylor coefficients at u of an ascending-coefficient polynomial (synthetic division)."""
    b = [complex(c) for c in coeffs[::-1]]
    out = []
    for _ in range(order + 1):
        if not b:
            out.append(0j)
            continue
        acc = []
        r = 0j
        for c in b:
            r = r * u + c
            acc.append(r)
        out.append(acc[-1])
        b = acc[:-1]
    return np.array(out)


class HoloMap:
    """Holomorphic function with access to derivatives.

    Either an ascending coefficient list, a Möbius quadruple (a, b, c, d)
    for (a z + b)/(c z + d), or an evaluator ``derivs(z, order)`` returning
    [phi(z), phi'(z), ..., phi^(order)(z)].
    """

    def __init__(self, coeffs=None, mobius=None, derivs=None, name=None):
        if sum(x is not None for x in (coeffs, mobius, derivs)) != 1:
            raise InputError("give exactly one of coeffs, mobius, derivs")
        self.coeffs = None if coeffs is None else np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
        if self.coeffs is not None and self.coeffs.size == 0:
            self.coeffs = np.zeros(1, dtype=complex)
        self.mobius = None if mobius is None else tuple(complex(x) for x in mobius)
        if self.mobius is not None:
            a, b, c, d = self.mobius
            if abs(a * d - b * c) == 0:
                raise InputError("degenerate Möbius coefficients")
        self._derivs = derivs
        self.name = name or ("poly" if coeffs is not None else "moebius" if mobius is not None else "map")

    @classmethod
    def poly(cls, coeffs):
        return cls(coeffs=coeffs, name="poly")

    @classmethod
    def identity(cls):
        return cls.poly([0, 1])

    @classmethod
    def from_mobius(cls, a, b, c, d):
        return cls(mobius=(a, b, c, d))

    @classmethod
    def disk_automorphism(cls, p, theta=0.0):
        """e^{i theta} (z - p) / (1 - conj(p) z)."""
        e = np.exp(1j * theta)
        return cls.from_mobius(e, -e * p, -np.conj(p), 1.0)

    @classmethod
    def from_derivatives(cls, derivs, name=None):
        return cls(derivs=derivs, name=name)

    @classmethod
    def parse(cls, text):
        """'poly:c0,c1,...' (complex literals allowed) or 'disk:p_re,p_im[,theta]'."""
        kind, _, rest = text.partition(":")
        try:
            vals = [complex(s.strip().replace("i", "j")) for s in rest.split(",") if s.strip()]
        except ValueError as exc:
            raise InputError(f"cannot parse map {text!r}: {exc}") from exc
        if kind == "poly" and vals:
            return cls.poly(vals)
        if kind == "disk" and len(vals) in (2, 3):
            theta = vals[2].real if len(vals) == 3 else 0.0
            return cls.disk_automorphism(complex(vals[0].real, vals[1].real), theta)
        raise InputError(f"unknown map specification {text!r}")

    @property
    def is_polynomial(self):
        return self.coeffs is not None

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.coeffs is not None:
            return np.polynomial.polynomial.polyval(z, self.coeffs)
        if self.mobius is not None:
            a, b, c, d = self.mobius
            return (a * z + b) / (c * z + d)
        return np.vectorize(lambda x: self._derivs(complex(x), 0)[0], otypes=[complex])(z)

    def derivatives(self, z, order):
        """[phi(z), ..., phi^(order)(z)]."""
        z = complex(z)
        if self.coeffs is not None:
            t = _taylor_shift(self.coeffs, z, order)
            return t * np.array([math.factorial(k) for k in range(order + 1)], dtype=float)
        if self.mobius is not None:
            a, b, c, d = self.mobius
            den = c * z + d
            if den == 0:
                raise DegeneracyError("Möbius map has a pole at the requested point")
            out = [(a * z + b) / den]
            for j in range(1, order + 1):
                out.append((b * c - a * d) * (-1) ** j * math.factorial(j) * c ** (j - 1) / den ** (j + 1))
            return np.array(out, dtype=complex)
        vals = np.asarray(self._derivs(z, order), dtype=complex)
        if vals.shape != (order + 1,):
            raise InputError("derivative oracle returned the wrong number of values")
        return vals

    def taylor(self, z, order):
        if self.coeffs is not None:
            return _taylor_shift(self.coeffs, complex(z), order)
        return self.derivatives(z, order) / np.array([math.factorial(k) for k in range(order + 1)], dtype=float)

    def inverse_point(self, w):
        if self.mobius is None:
            raise InputError("only Möbius maps carry a closed-form inverse")
        a, b, c, d = self.mobius
        return (d * w - b) / (-c * w + a)

    def check_disk(self, samples=64, radii=(0.25, 0.5, 0.75, 0.999)):
        """Warn when phi leaves the unit disk on a polar grid; returns the max modulus seen."""
        th = 2 * np.pi * np.arange(samples) / samples
        z = np.concatenate([[0.0]] + [r * np.exp(1j * th) for r in radii])
        top = float(np.max(np.abs(self(z))))
        if top >= 1.0:
            warnings.warn(f"{self.name} does not map the unit disk into itself (max |phi| = {top:.4g})", RuntimeWarning)
        return top

    def spec(self):
        if self.coeffs is not None:
            return "poly:" + ",".join(_fmt_complex(c) for c in self.coeffs)
        return self.name


def _fmt_complex(c):
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    return f"{c.real!r}{c.imag:+.17g}j"


def deg_of_zero(phi, u, deriv_tol=DEFAULT_DERIV_TOL, max_order=16):
    """Order of the zero of phi(z) - phi(u) at z = u.

    Taylor coefficients at u are compared against deriv_tol times the largest
    one seen; polynomials use exact synthetic division.
    """
    t = np.abs(phi.taylor(u, max_order))
    top = float(np.max(t))
    thresh = deriv_tol * top
    for k in range(1, max_order + 1):
        if t[k] > thresh:
            return k
    raise MapDegeneracyError(
        f"phi - phi({complex(u):.6g}) vanishes to order > {max_order}; the map is flat there"
    )


def spectral_map(S, phi, deriv_tol=DEFAULT_DERIV_TOL, max_order=16, merge_tol=1e-12):
    """(u, k) -> (phi(u), floor(k / deg_u phi)); coinciding images are pooled."""
    images = {}
    reps = []
    pts = []
    for u in S.classical:
        deg = deg_of_zero(phi, u, deriv_tol, max_order)
        w = complex(phi(u))
        for r in reps:
            if abs(r - w) <= merge_tol * max(1.0, abs(w)):
                w = r
                break
        else:
            reps.append(w)
        images[u] = (w, deg)
    for u, k in S.points:
        w, deg = images[u]
        pts.append((w, k // deg))
    return JointSpectrum(tuple(pts))


def _cluster_layout(an):
    """Contiguous Schur form with clusters in order; returns (T, Z, slices)."""
    T, Z = an.T, an.Z
    labels = list(range(T.shape[0]))
    placed = []
    slices = []
    for g in an.groups:
        pos = [labels.index(i) for i in placed + g]
        T, Z, _ = _reorder(T, Z, pos)
        chosen = set(pos)
        labels = [labels[p] for p in sorted(pos)] + [labels[p] for p in range(len(labels)) if p not in chosen]
        start = len(placed)
        placed += g
        slices.append(slice(start, len(placed)))
    return T, Z, slices


def matrix_function(phi, M, cluster_tol=None, rank_tol=None, cond_limit=SIMILARITY_COND_LIMIT):
    """phi(M) through Schur clusters: each cluster block T_c = lam + N gets
    sum_j phi^(j)(lam)/j! N^j, the Jordan-block formula in a triangular basis,
    and the blocks are decoupled by Sylvester solves."""
    an = _analyse(M, cluster_tol, rank_tol)
    d = an.M.shape[0]
    if d == 0:
        return an.M.copy()
    T, Z, slices = _cluster_layout(an)
    S = np.eye(d, dtype=complex)
    B = T.copy()
    for sl in slices[:-1]:
        rest = slice(sl.stop, d)
        X = scipy.linalg.solve_sylvester(B[sl, sl], -B[rest, rest], -B[sl, rest])
        step = np.eye(d, dtype=complex)
        step[sl, rest] = X
        S = S @ step
        B[sl, rest] = 0.0
    cond = np.linalg.cond(S)
    if cond > cond_limit:
        warnings.warn(f"block-diagonalising similarity is ill-conditioned (cond = {cond:.3g})", RuntimeWarning)
    F = np.zeros((d, d), dtype=complex)
    for sl, lam, sizes in zip(slices, an.lams, an.sizes):
        blk = B[sl, sl]
        mu = blk.shape[0]
        N = blk - lam * np.eye(mu)
        L = max(sizes)
        der = phi.derivatives(lam, L - 1)
        acc = np.zeros((mu, mu), dtype=complex)
        P = np.eye(mu, dtype=complex)
        for j in range(L):
            acc += der[j] / math.factorial(j) * P
            P = P @ N
        F[sl, sl] = acc
    return Z @ S @ F @ np.linalg.solve(S, Z.conj().T)


# jets ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class Jet:
    """Point (z, f(z), f'(z), ..., f^(n)(z)) of the jet space.

    values has shape (n + 1, *shape): scalar jets use shape (), Clifford
    jets in Cl_2 are stored as complex pairs (see cl2_to_pair).
    """

    z: complex
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    @property
    def order(self):
        return self.values.shape[0] - 1

    @classmethod
    def of(cls, phi, z, order):
        return cls(z, phi.derivatives(z, order))

    @classmethod
    def from_taylor(cls, z, taylor):
        t = np.asarray(taylor, dtype=complex)
        f = np.array([math.factorial(k) for k in range(t.shape[0])], dtype=float)
        return cls(z, t * f.reshape((-1,) + (1,) * (t.ndim - 1)))

    def taylor(self):
        f = np.array([math.factorial(k) for k in range(self.order + 1)], dtype=float)
        return self.values / f.reshape((-1,) + (1,) * (self.values.ndim - 1))

    def allclose(self, other, tol=1e-9):
        return abs(self.z - other.z) <= tol and np.allclose(self.values, other.values, atol=tol, rtol=0)


def cl2_to_pair(c):
    """c0 + c1 e1 + c2 e2 + c12 e12 = alpha + beta e1 with alpha, beta in span{1, e12} = C."""
    c = np.asarray(c, dtype=float)
    return np.stack([c[..., 0] + 1j * c[..., 3], c[..., 1] + 1j * c[..., 2]], axis=-1)


def pair_to_cl2(p):
    p = np.asarray(p, dtype=complex)
    return np.stack([p[..., 0].real, p[..., 1].real, p[..., 1].imag, p[..., 0].imag], axis=-1)


def _e1_left(p):
    # e1 (alpha + beta e1) = -conj(beta) + conj(alpha) e1
    return np.stack([-np.conj(p[..., 1]), np.conj(p[..., 0])], axis=-1)


def _series_mul(a, b, order):
    """Truncated product of Taylor series; a is scalar, b may carry trailing axes."""
    out = np.zeros((order + 1,) + b.shape[1:], dtype=complex)
    for i in range(order + 1):
        for j in range(order + 1 - i):
            out[i + j] += a[i] * b[j]
    return out


def compose_taylor(outer, inner, order):
    """Taylor data of outer(inner(z)) at z0 from outer's data at inner(z0) (Faà di Bruno)."""
    h = np.array(inner[: order + 1], dtype=complex)
    h[0] = 0.0
    out = np.zeros((order + 1,) + outer.shape[1:], dtype=complex)
    power = np.zeros(order + 1, dtype=complex)
    power[0] = 1.0
    for k in range(min(order, outer.shape[0] - 1) + 1):
        out += power.reshape((-1,) + (1,) * (outer.ndim - 1)) * outer[k]
        power = _series_mul(h, power[:, None], order)[:, 0]
    return out


@dataclass(frozen=True)
class FunctionMap:
    """[psi f](z) = m(z) * f~(s(z)) with f~ = f, or f~(z) = e1 f(conj z) when reflect is set.

    ``inner`` is s, ``multiplier`` is m (None for 1).  A jet of f at w is sent
    to a jet of psi f at the point z0 with s(z0) = w (or conj w).
    """

    inner: HoloMap
    multiplier: HoloMap | None = None
    reflect: bool = False

    def base_for(self, w):
        target = np.conj(w) if self.reflect else w
        return self.inner.inverse_point(target)


def jet_prolong_map(psi, j, base=None, tol=1e-9):
    """psi^(n)(J_n f) = J_n(psi f) computed from the Taylor data of f at j.z."""
    if isinstance(psi, HoloMap):
        psi = FunctionMap(psi)
    n = j.order
    z0 = psi.base_for(j.z) if base is None else complex(base)
    src = j.taylor()
    w = j.z
    if psi.reflect:
        if src.shape[-1:] != (2,):
            raise InputError("a reflected map acts on Cl_2-valued jets stored as complex pairs")
        src = _e1_left(src)
        w = np.conj(w)
    inner = psi.inner.taylor(z0, n)
    if abs(inner[0] - w) > tol * max(1.0, abs(w)):
        raise InputError(f"inner map sends {z0} to {inner[0]}, not to the jet base {w}")
    out = compose_taylor(src, inner, n)
    if psi.multiplier is not None:
        out = _series_mul(psi.multiplier.taylor(z0, n), out, n)
    return Jet.from_taylor(z0, out)


def zeta_of(points):
    """Complex coordinate zeta = x2 + x1 e1e2 of points in R^2."""
    points = np.atleast_2d(points)
    return points[:, 1] + 1j * points[:, 0]


def point_of(zeta):
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    return np.column_stack([zeta.imag, zeta.real])


def rho1_jet_map(g, tol=1e-9):
    """The n = 2 action rho_1(g) f(x) = F(x) f(g^{-1} x) written as a FunctionMap in zeta.

    For even w the inverse image is a holomorphic Möbius map of zeta and F
    is 1/(p + r zeta); for odd w the inverse image is antiholomorphic and F
    carries a right factor e1, which the reflect flag absorbs.
    """
    from .analysis import _ab, _factor, _inverse_image

    if g.dim != 2:
        raise InputError("jet prolongation of rho_1 is implemented for n = 2")
    a, b = _ab(g)
    probe = np.array([0.0, 0.31 + 0.12j, -0.17 + 0.43j, 0.22 - 0.38j])
    F = _factor(a, b, point_of(probe), 2)
    hz = zeta_of(_inverse_image(a, b, point_of(probe), 2))
    odd = float(np.max(np.abs(F[:, 1:3]))) > float(np.max(np.abs(F[:, [0, 3]])))
    if odd:
        # F = Fc e1 with Fc = F (-e1)
        Fc = F[:, 1] + 1j * F[:, 2]
        hz = np.conj(hz)
    else:
        Fc = F[:, 0] + 1j * F[:, 3]
    A0, B, z1 = hz[0], hz[1], probe[1]
    s = (A0 - B) / (z1 * (B * np.conj(A0) - 1))
    inner = HoloMap.from_mobius(s, A0, s * np.conj(A0), 1.0)
    p = 1 / Fc[0]
    r = (1 / Fc[1] - p) / z1
    mult = HoloMap.poly([1 / p]) if abs(r) <= tol * abs(p) else HoloMap.from_mobius(0.0, 1.0, r, p)
    if np.max(np.abs(inner(probe) - hz)) > tol or np.max(np.abs(mult(probe) - Fc)) > tol:
        raise DegeneracyError("rho_1 does not reduce to a Möbius map with a Möbius multiplier in zeta")
    return FunctionMap(inner, mult, reflect=odd)


# the Jordan-zero comparison --------------------------------------------------------------

def nilpotent_pair(L):
    """Real symmetric (A1, A2) with A1 + i A2 unitarily similar to J_L(0)."""
    from .calculus import OperatorTuple

    J = jordan_block(0.0, L)
    K = np.fliplr(np.eye(L))
    Q = (np.eye(L) - 1j * K) / np.sqrt(2.0)
    N = Q @ J @ Q.conj().T
    N = 0.5 * (N + N.T)
    return OperatorTuple((N.real, N.imag), tol=1e-12)


def root_vector(t, tol=1e-9):
    """A real vector of maximal order for the nilpotent complexification of t."""
    N = complexify(t)
    L = N.shape[0]
    for v in (np.eye(L)[-1], np.ones(L), np.arange(1.0, L + 1)):
        if np.linalg.norm(np.linalg.matrix_power(N, L - 1) @ v) > tol:
            return v
    raise DegeneracyError("no real root vector of maximal order found")


def _vm_coefficient(k):
    from .analysis import _orthonormal_degree

    idx, coef = _orthonormal_degree(2, k)
    return coef[0, 0]


def jordan_zero_equivalence(L, gs, K=None, quad=None, jet_gs=None):
    """Largest discrepancy between rho_{A,v}(g) on span{V_l(A) v : l < L} and the
    jet prolongation of rho_1(g) of order L - 1, over the sampled g.

    jet_gs, when given, supplies the elements used on the jet side (pairwise
    with gs); a mismatched list is a negative control.

    A is a symmetric pair whose complexification is a single Jordan block of
    length L at 0 and v a root vector of order L.  The representation side
    uses the token matrix and the operator images V_l(A); the jet side uses
    closed-form derivatives and Faà di Bruno composition only.
    """
    from .analysis import token_matrix
    from .calculus import module_vector, right_mul, v_image
    from .clifford_core import Multivector, mv_inverse, product_arrays

    if L < 1:
        raise InputError("block length must be positive")
    K = L + 1 if K is None else max(int(K), L - 1)
    t = nilpotent_pair(L)
    v = root_vector(t)
    vec = module_vector(v, 2)
    images = [v_image(t, (0, l)).apply(vec) for l in range(K + 1)]
    span = np.stack(
        [right_mul(images[l], Multivector.blade(2, m), 2).ravel() for l in range(L) for m in range(4)], axis=1
    )
    if np.linalg.matrix_rank(span, tol=1e-10) < 4 * L:
        raise DegeneracyError("the vectors V_l(A) v, l < L, are dependent")
    cinv = [mv_inverse(Multivector(2, _vm_coefficient(l))).coeffs for l in range(L)]
    worst = 0.0
    jet_gs = gs if jet_gs is None else jet_gs
    if len(jet_gs) != len(gs):
        raise InputError("jet_gs must pair up with gs")
    for g, h in zip(gs, jet_gs):
        idx, T = token_matrix(g, K, quad)
        pos = {m: i for i, m in enumerate(idx)}
        psi = rho1_jet_map(h)
        w0 = complex(psi.inner(0.0))
        if psi.reflect:
            w0 = np.conj(w0)
        for j in range(L):
            # jet of V_j = zeta^j c_j at w0, order L - 1
            cj = _vm_coefficient(j)
            tay = np.zeros((L, 4))
            for k in range(min(j, L - 1) + 1):
                zk = complex(w0) ** (j - k) * math.comb(j, k)
                tay[k] = product_arrays(np.array([zk.real, 0, 0, zk.imag]), cj, 2)
            jet = Jet.from_taylor(w0, cl2_to_pair(tay))
            out = jet_prolong_map(psi, jet, base=0.0)
            e = pair_to_cl2(out.taylor())
            col_jet = np.array([product_arrays(cinv[l], e[l], 2) for l in range(L)])
            col_rep = np.array([T[pos[(0, l)], pos[(0, j)]] for l in range(L)])
            worst = max(worst, float(np.max(np.abs(col_jet - col_rep))))
            lhs = sum(right_mul(images[l], Multivector(2, T[pos[(0, l)], pos[(0, j)]]), 2) for l in range(K + 1))
            rhs = sum(right_mul(images[l], Multivector(2, col_jet[l]), 2) for l in range(L))
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


# examples -----------------------------------------------------------------------------------

FIG1_VALUES = (
    (0.75, math.pi / 4),
    (2.0 / 3.0, 5 * math.pi / 6),
    (0.4, -3 * math.pi / 4),
    (0.6, -math.pi / 3),
)
FIG1_SIZES = (3, 4, 1, 2)


def fig1_eigenvalues():
    return [r * complex(math.cos(a), math.sin(a)) for r, a in FIG1_VALUES]


def fig1_matrix():
    return jordan_matrix(list(zip(fig1_eigenvalues(), FIG1_SIZES)))


def pauli_pair():
    from .calculus import OperatorTuple

    return OperatorTuple((np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]])))


FIG1_ORDERS = (1, 3, 2, 5)


def hermite_poly(nodes, values, orders):
    """Polynomial with phi(u_i) = values_i and phi^(j)(u_i) = 0 for 1 <= j < orders_i."""
    rows, rhs = [], []
    deg = sum(orders) - 1
    for u, val, o in zip(nodes, values, orders):
        for j in range(o):
            row = np.zeros(deg + 1, dtype=complex)
            for p in range(j, deg + 1):
                row[p] = math.perm(p, j) * u ** (p - j)
            rows.append(row)
            rhs.append(val if j == 0 else 0.0)
    return HoloMap.poly(np.linalg.solve(np.array(rows), np.array(rhs, dtype=complex)))


def fig1_phi():
    """Fixes the four eigenvalues with zero orders 1, 3 (exactly), 2 and 5."""
    u = fig1_eigenvalues()
    return hermite_poly(u, u, FIG1_ORDERS)


# rendering -------------------------------------------------------------------------------------

def _panel(ax, S, mode, title):
    th = np.linspace(0, 2 * np.pi, 361)
    ax.plot(np.cos(th), np.sin(th), color="0.3", lw=0.8)
    ax.axhline(0, color="0.85", lw=0.5)
    ax.axvline(0, color="0.85", lw=0.5)
    ax.set_aspect("equal")
    ax.set_xlim(-1.15, 1.15)
    ax.set_ylim(-1.15, 1.15)
    ax.set_title(title, fontsize=9)
    for u, counts in sorted(S.sites().items(), key=lambda p: _key(p[0])):
        if abs(u) > 1 + 1e-12:
            warnings.warn(f"spectral point {u} lies outside the closed unit disk", RuntimeWarning)
        if mode == "classical":
            ax.plot([u.real], [u.imag], "o", color="k", ms=4)
            continue
        total = sum(counts)
        for k, c in enumerate(counts):
            ax.plot([u.real], [u.imag], "o", mfc="none", mec="C0", ms=4 + 4 * k, mew=0.6 + 0.4 * (c > 1))
        ax.annotate(str(total), (u.real, u.imag), xytext=(6, 6), textcoords="offset points", fontsize=8)


def render_spectrum(S, mode="jet", mapped=None):
    """Deterministic SVG text: unit circle with the spectrum.

    mode "classical" marks eigenvalues only; "jet" draws one concentric ring
    per jet level and labels each site with its number of points;
    "mapped-pair" draws S and ``mapped`` side by side.
    """
    import matplotlib

    from matplotlib.backends.backend_svg import FigureCanvasSVG
    from matplotlib.figure import Figure

    if mode not in ("classical", "jet", "mapped-pair"):
        raise InputError(f"unknown render mode {mode!r}")
    if mode == "mapped-pair" and mapped is None:
        raise InputError("mapped-pair mode needs the mapped spectrum")
    with matplotlib.rc_context({"svg.hashsalt": "cliffspec", "svg.fonttype": "none", "path.simplify": False}):
        if mode == "mapped-pair":
            fig = Figure(figsize=(8, 4))
            axes = fig.subplots(1, 2)
            _panel(axes[0], S, "jet", "source")
            _panel(axes[1], mapped, "jet", "image")
        else:
            fig = Figure(figsize=(4, 4))
            _panel(fig.subplots(), S, mode, "classical" if mode == "classical" else "jet")
        FigureCanvasSVG(fig)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    return buf.getvalue()
