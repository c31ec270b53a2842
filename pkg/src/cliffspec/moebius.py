"""Möbius transformations of the one-point compactified R^n and the unit-ball group.

Group elements of the sphere-preserving subgroup are kept in (u, w) form:
u is a point of the open unit ball and w is a unit element of the Clifford
group acting as the rotation part.  The 2x2 Clifford matrix of (u, w) is

    (1 + u^2)^(-1/2) [[w, w u'], [w' u, w']]

where u^2 = -|u|^2 is the Clifford square.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford_core import (
    DEFAULT_TOL,
    Multivector,
    conjugation,
    from_blade_map,
    geometric_product as gp,
    grade_involution,
    in_pin,
    is_vector,
    modulus,
    mv_inverse,
    reversion,
    to_blade_map,
    vector_embed,
)
from .errors import (
    DegeneracyError,
    NotInGroupError,
    NotInTnError,
    NotInvertibleError,
    OutOfBallError,
    QuadratureError,
)


class _Infinity:
    """The point at infinity of the compactified R^n."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


def is_infinity(x):
    return x is INFINITY


@dataclass(frozen=True)
class CliffMat2:
    a: Multivector
    b: Multivector
    c: Multivector
    d: Multivector

    @property
    def dim(self):
        return self.a.dim

    @classmethod
    def identity(cls, dim):
        one = Multivector.scalar(dim)
        zero = Multivector(dim)
        return cls(one, zero, zero, one)

    def __matmul__(self, other):
        return CliffMat2(
            gp(self.a, other.a) + gp(self.b, other.c),
            gp(self.a, other.b) + gp(self.b, other.d),
            gp(self.c, other.a) + gp(self.d, other.c),
            gp(self.c, other.b) + gp(self.d, other.d),
        )

    def scale(self, s):
        return CliffMat2(self.a * s, self.b * s, self.c * s, self.d * s)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def allclose(self, other, tol=DEFAULT_TOL):
        return all(x.allclose(y, tol) for x, y in zip(self.entries(), other.entries()))

    def max_abs_diff(self, other):
        return max(float(np.max(np.abs(x.coeffs - y.coeffs))) for x, y in zip(self.entries(), other.entries()))


def is_group_matrix(M, tol=1e-9):
    """Quadruple conditions: entries in T(n), ad* - bc* real and nonzero,
    a*b, c*d, ac*, bd* vectors."""
    try:
        for e in M.entries():
            if e.norm() > 0:
                modulus(e, tol)
    except NotInTnError:
        return False
    delta = gp(M.a, reversion(M.d)) - gp(M.b, reversion(M.c))
    scale = max(1.0, max(e.norm() for e in M.entries()) ** 2)
    if np.max(np.abs(delta.coeffs[1:])) > tol * scale or abs(delta.coeffs[0]) <= tol * scale:
        return False
    for x, y in ((reversion(M.a), M.b), (reversion(M.c), M.d), (M.a, reversion(M.c)), (M.b, reversion(M.d))):
        if not is_vector(gp(x, y), tol * scale):
            return False
    return True


def _as_vector(x, dim, tol):
    if isinstance(x, Multivector):
        if not is_vector(x, tol * max(1.0, x.norm())):
            raise ValueError("expected a vector")
        return x
    return vector_embed(np.asarray(x, dtype=float), dim)


def moebius_apply(M, x, tol=DEFAULT_TOL, check=False):
    """x -> (a x + b)(c x + d)^{-1}; returns a numpy vector or INFINITY."""
    if check and not is_group_matrix(M):
        raise NotInGroupError("matrix does not satisfy the group conditions")
    if is_infinity(x):
        if M.c.norm() <= tol * max(1.0, M.a.norm()):
            return INFINITY
        try:
            y = gp(M.a, mv_inverse(M.c, tol))
        except NotInvertibleError:
            return INFINITY
        return y.vector_part()
    X = _as_vector(x, M.dim, tol)
    num = gp(M.a, X) + M.b
    den = gp(M.c, X) + M.d
    try:
        y = gp(num, mv_inverse(den, tol))
    except NotInvertibleError:
        return INFINITY
    if not is_vector(y, 1e-6 * max(1.0, y.norm())):
        raise DegeneracyError("Möbius image is not a vector; matrix is not in the group")
    return y.vector_part()


# spheres ------------------------------------------------------------------

@dataclass(frozen=True)
class SphereCoord:
    """Sphere |y - m|^2 = r2; r2 = 0 encodes the point m."""

    m: np.ndarray
    r2: float

    def __post_init__(self):
        object.__setattr__(self, "m", np.asarray(self.m, dtype=float).copy())
        object.__setattr__(self, "r2", float(self.r2))


def sphere_to_matrix(s, dim=None):
    """Representative [[m, -m^2 - r^2], [1, -m]] of the projective ray of s."""
    dim = dim or len(s.m)
    m = vector_embed(s.m, dim)
    top_right = float(s.m @ s.m) - s.r2  # -m^2 - r^2 with m^2 = -|m|^2
    return CliffMat2(m, Multivector.scalar(dim, top_right), Multivector.scalar(dim, 1.0), -m)


def matrix_to_sphere(M, tol=1e-9):
    c = M.c
    lam = c.coeffs[0]
    scale = max(e.norm() for e in M.entries())
    if abs(lam) <= tol * scale or np.max(np.abs(c.coeffs[1:])) > tol * scale:
        raise DegeneracyError("lower-left entry is not a nonzero scalar")
    N = M.scale(1.0 / lam)
    if not is_vector(N.a, tol * max(1.0, N.a.norm())) or not N.a.allclose(-N.d, tol * max(1.0, N.a.norm())):
        raise DegeneracyError("matrix is not in sphere form")
    if np.max(np.abs(N.b.coeffs[1:])) > tol * max(1.0, N.b.norm()):
        raise DegeneracyError("upper-right entry is not a scalar")
    m = N.a.vector_part()
    return SphereCoord(m, float(m @ m) - N.b.coeffs[0])


def projective_action(g, s, tol=1e-9):
    """g S [[conj d, conj b], [conj c, conj a]] read back as a sphere."""
    S = sphere_to_matrix(s, g.dim)
    right = CliffMat2(conjugation(g.d), conjugation(g.b), conjugation(g.c), conjugation(g.a))
    return matrix_to_sphere(g @ S @ right, tol)


# the (u, w) coordinates ---------------------------------------------------

@dataclass(frozen=True)
class MoebElement:
    u: np.ndarray
    w: Multivector

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).copy()
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        if u.size != self.w.dim:
            raise ValueError("u and w dimensions differ")

    @property
    def dim(self):
        return self.w.dim

    @classmethod
    def identity(cls, dim):
        return cls(np.zeros(dim), Multivector.scalar(dim))

    def to_json(self):
        return {"u": [float(v) for v in self.u], "w": to_blade_map(self.w)}

    @classmethod
    def from_json(cls, data, dim=None):
        u = np.asarray(data["u"], dtype=float)
        dim = dim or u.size
        return cls(u, from_blade_map(data.get("w", {"1": 1.0}), dim))

    def matrix(self):
        return from_uw(self)

    def __call__(self, x):
        return moebius_apply(from_uw(self), x)

    def __matmul__(self, other):
        return compose(self, other)


def _check_element(e, tol=1e-9):
    if float(e.u @ e.u) >= 1.0:
        raise OutOfBallError(f"|u| = {np.linalg.norm(e.u)} is not inside the unit ball")
    sq = gp(e.w, conjugation(e.w))
    if not sq.allclose(Multivector.scalar(e.dim), tol):
        raise NotInGroupError("rotation part w is not a unit Clifford group element")


def from_uw(e, check=True):
    if check:
        _check_element(e)
    U = vector_embed(e.u, e.dim)
    wp = grade_involution(e.w)
    s = 1.0 / np.sqrt(1.0 - float(e.u @ e.u))
    return CliffMat2(e.w * s, gp(e.w, -U) * s, gp(wp, U) * s, wp * s)


def is_alpha_beta(M, tol=1e-9):
    """Check the [[a, b'], [b, a']] form with |a|^2 - |b|^2 = 1."""
    scale = max(1.0, max(e.norm() for e in M.entries()))
    if not M.b.allclose(grade_involution(M.c), tol * scale):
        return False
    if not M.d.allclose(grade_involution(M.a), tol * scale):
        return False
    try:
        na, nb = modulus(M.a, tol * scale), modulus(M.c, tol * scale)
    except NotInTnError:
        return False
    if abs(na * na - nb * nb - 1.0) > tol * scale * scale:
        return False
    return is_vector(gp(M.a, reversion(M.c)), tol * scale * scale)


def to_uw(M, tol=1e-9):
    """w = a/|a|, u = (a*/|a|^2) b for M = [[a, b'], [b, a']]."""
    if not is_alpha_beta(M, tol):
        raise NotInGroupError("matrix is not in the unit-sphere Möbius group")
    na = modulus(M.a, tol)
    w = M.a / na
    u = gp(reversion(M.a), M.c) / (na * na)
    if not is_vector(u, tol * max(1.0, u.norm())):
        raise NotInGroupError("u is not a vector")
    uv = u.vector_part()
    if float(uv @ uv) >= 1.0:
        raise OutOfBallError("u is outside the unit ball")
    return MoebElement(uv, w)


def compose(g1, g2):
    return to_uw(from_uw(g1) @ from_uw(g2))


def inverse(g):
    """Closed form for the inverse: (w' u' conj(w), conj(w)) in (u, w) coordinates.

    Follows from diag(w, w') [[1, u'], [u, 1]] = [[1, v'], [v, 1]] diag(w, w')
    with v = w' u conj(w).  The variant w* u' w agrees with it only when w is
    a scalar or a vector.
    """
    U = vector_embed(g.u, g.dim)
    new_u = gp(gp(grade_involution(g.w), grade_involution(U)), conjugation(g.w))
    return MoebElement(new_u.vector_part(), conjugation(g.w))


def inverse_matrix(M):
    """Matrix inverse of an alpha-beta matrix: [[conj a, -conj b], [-b*, a*]] with b the lower-left entry."""
    return CliffMat2(conjugation(M.a), -conjugation(M.c), -reversion(M.c), reversion(M.a))


# sampling -----------------------------------------------------------------

def random_ball_point(rng, dim, rmax=0.95):
    v = rng.normal(size=dim)
    v /= np.linalg.norm(v)
    return v * rmax * rng.uniform() ** (1.0 / dim)


def random_pin(rng, dim, max_factors=3):
    """Product of 0..max_factors random unit vectors."""
    w = Multivector.scalar(dim)
    for _ in range(int(rng.integers(0, max_factors + 1))):
        v = rng.normal(size=dim)
        w = gp(w, vector_embed(v / np.linalg.norm(v), dim))
    return w


def random_element(rng, dim, rmax=0.95):
    return MoebElement(random_ball_point(rng, dim, rmax), random_pin(rng, dim))


# invariant measures ---------------------------------------------------------

def haar_density(u):
    """|1 + u^2|^{-n} with u^2 = -|u|^2."""
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    r2 = np.sum(u * u, axis=-1)
    if np.any(r2 >= 1.0):
        raise OutOfBallError("Haar density is only defined inside the unit ball")
    return np.abs(1.0 - r2) ** (-n)


def sphere_nodes(dim, count=None):
    """Quadrature nodes and weights on S^{dim-1}, weights summing to 1.

    dim = 2 uses the equally spaced trapezoid rule, which is spectrally
    accurate for trigonometric polynomials.  dim = 3 uses a Lebedev rule;
    count is then the rule order (default 29, 302 nodes).
    """
    if dim == 2:
        count = count or 256
        t = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(t), np.sin(t)], axis=1), np.full(count, 1.0 / count)
    if dim == 3:
        from scipy.integrate import lebedev_rule

        x, wts = lebedev_rule(count or 29)
        return np.ascontiguousarray(x.T), wts / wts.sum()
    raise ValueError("sphere quadrature is available for n = 2 and n = 3 only")


def rotation_nodes(dim, count=16, seed=0):
    """Pin elements with equal weights approximating the Haar measure on O(n).

    Half of the nodes are rotations and half reflections.  n = 2 uses equally
    spaced angles; n = 3 uses seeded uniform unit quaternions.
    """
    half = max(1, count // 2)
    rots = []
    if dim == 2:
        for t in np.pi * 2 * np.arange(half) / half:
            rots.append(Multivector(2, [np.cos(t / 2), 0.0, 0.0, np.sin(t / 2)]))
    elif dim == 3:
        rng = np.random.default_rng(seed)
        for q in rng.normal(size=(half, 4)):
            q = q / np.linalg.norm(q)
            c = np.zeros(8)
            c[0], c[6], c[5], c[3] = q  # 1, e23, e13, e12
            rots.append(Multivector(3, c))
    else:
        raise ValueError("rotation sampling is available for n = 2 and n = 3 only")
    e1 = Multivector.basis_vector(dim, 1)
    nodes = rots + [gp(r, e1) for r in rots]
    return nodes, np.full(len(nodes), 1.0 / len(nodes))


def _as_array(v):
    return np.asarray(v.coeffs if isinstance(v, Multivector) else v, dtype=float)


def _hardy_once(f, dim, r, nodes, w_nodes):
    pts, wts = sphere_nodes(dim, nodes)
    if w_nodes is None:
        ws, wws = [Multivector.scalar(dim)], np.array([1.0])
    else:
        ws, wws = w_nodes
    dens = (1.0 - r * r) ** (-(dim - 1))
    total = None
    wrap = False
    for w, ww in zip(ws, wws):
        outs = [f(r * p, w) for p in pts]
        wrap = isinstance(outs[0], Multivector)
        vals = np.array([_as_array(o) for o in outs])
        part = ww * np.tensordot(wts, vals, axes=1)
        total = part if total is None else total + part
    total = total * dens
    return Multivector(dim, total) if wrap else total


def _size(v):
    return v.norm() if isinstance(v, Multivector) else float(np.linalg.norm(v))


def hardy_functional(f, dim, r=0.99, nodes=None, w_nodes=None, tol=1e-8, check=True):
    """Hardy-type invariant functional evaluated on the sphere of radius r.

    f(u, w) returns a Multivector (or a real array, e.g. a module element).
    Both the sphere and the rotation measures have total mass one.  w_nodes
    is a (nodes, weights) pair from rotation_nodes; leave it None when f does
    not depend on w.  With check=True the result is compared against a
    coarser rule and a QuadratureError is raised when they disagree by more
    than 10 * tol.
    """
    if not 0.0 < r < 1.0:
        raise ValueError("radius must lie in (0, 1)")
    fine = _hardy_once(f, dim, r, nodes, w_nodes)
    if check:
        if dim == 2:
            coarse_nodes = max(8, (nodes or 256) // 2)
        else:
            coarse_nodes = {29: 23, 23: 19, 19: 17}.get(nodes or 29, 17)
        coarse = _hardy_once(f, dim, r, coarse_nodes, w_nodes)
        if _size(fine - coarse) > 10 * tol * max(1.0, _size(fine)):
            raise QuadratureError("Hardy functional quadrature is under-resolved")
    return fine


def hardy_limit(f, dim, radii=(0.9, 0.99), **kw):
    """Extrapolate the Hardy functional to r = 1, linearly in r^2.

    For Hardy-class integrands the value at radius r is a power series in
    r^2, so this is exact when only the constant and r^2 terms are present.
    Returns (estimate, |H(r2) - H(r1)|).
    """
    r1, r2 = radii
    h1 = hardy_functional(f, dim, r1, **kw)
    h2 = hardy_functional(f, dim, r2, **kw)
    t = (1.0 - r2 * r2) / (r2 * r2 - r1 * r1)
    return h2 + (h2 - h1) * t, _size(h2 - h1)
