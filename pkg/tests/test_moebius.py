import math

import numpy as np
import pytest

from cliffspec import moebius as mo
from cliffspec.clifford_core import Multivector, kelvin_inverse, vector_embed
from cliffspec.errors import NotInGroupError, OutOfBallError


def one(dim):
    return Multivector.scalar(dim)


def zero(dim):
    return Multivector(dim)


def test_identity_matrix_fixes_points(rng):
    x = rng.normal(size=3)
    assert np.allclose(mo.moebius_apply(mo.CliffMat2.identity(3), x), x)


def test_translation(rng):
    x, y = rng.normal(size=3), rng.normal(size=3)
    M = mo.CliffMat2(one(3), vector_embed(y), zero(3), one(3))
    assert np.allclose(mo.moebius_apply(M, x), x + y)


def test_inversion_matches_kelvin(rng):
    M = mo.CliffMat2(zero(3), -one(3), one(3), zero(3))
    for _ in range(20):
        x = rng.normal(size=3)
        y = mo.moebius_apply(M, x)
        # -x^{-1} = x / |x|^2
        assert np.allclose(y, -kelvin_inverse(vector_embed(x)).vector_part())
        assert np.allclose(y, x / (x @ x))


def test_unit_sphere_matrix():
    M = mo.sphere_to_matrix(mo.SphereCoord(np.zeros(2), 1.0))
    ref = mo.CliffMat2(zero(2), -one(2), one(2), zero(2))
    assert M.allclose(ref)


def test_point_and_sphere_round_trip():
    x = np.array([0.3, -0.2])
    M = mo.sphere_to_matrix(mo.SphereCoord(x, 0.0))
    X = vector_embed(x)
    assert M.a.allclose(X) and M.d.allclose(-X)
    s = mo.matrix_to_sphere(mo.sphere_to_matrix(mo.SphereCoord([1.0, 0.0], 4.0)))
    assert np.allclose(s.m, [1.0, 0.0]) and s.r2 == pytest.approx(4.0)
    assert mo.sphere_to_matrix(mo.SphereCoord([1.0, 0.0], 4.0)).b.coeffs[0] == pytest.approx(-3.0)


def test_projective_action_on_points(rng):
    for _ in range(100):
        g = mo.random_element(rng, 2, 0.9)
        x = rng.normal(size=2) * 0.5
        s = mo.projective_action(mo.from_uw(g), mo.SphereCoord(x, 0.0))
        assert s.r2 == pytest.approx(0.0, abs=1e-9)
        assert np.allclose(s.m, mo.moebius_apply(mo.from_uw(g), x), atol=1e-9)


def test_projective_action_fixes_unit_sphere(rng):
    g = mo.random_element(rng, 3, 0.9)
    s = mo.projective_action(mo.from_uw(g), mo.SphereCoord(np.zeros(3), 1.0))
    assert np.allclose(s.m, 0.0, atol=1e-9) and s.r2 == pytest.approx(1.0)


def test_from_uw_identity():
    assert mo.from_uw(mo.MoebElement.identity(3)).allclose(mo.CliffMat2.identity(3))


def test_uw_round_trip_and_alpha_beta(rng):
    from cliffspec.clifford_core import modulus

    for dim in (2, 3):
        for _ in range(500):
            g = mo.random_element(rng, dim, 0.95)
            M = mo.from_uw(g)
            h = mo.to_uw(M)
            assert mo.from_uw(h).max_abs_diff(M) < 1e-10
            assert modulus(M.a) ** 2 - modulus(M.c) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_out_of_ball():
    with pytest.raises(OutOfBallError):
        mo.from_uw(mo.MoebElement(np.array([0.8, 0.7]), one(2)))


def test_not_in_group():
    M = mo.CliffMat2(one(2), one(2), zero(2), one(2))
    with pytest.raises(NotInGroupError):
        mo.to_uw(M)


def test_translations_to_origin(rng):
    for dim in (2, 3):
        u = mo.random_ball_point(rng, dim, 0.9)
        p = mo.MoebElement(u, one(dim))
        assert mo.from_uw(mo.inverse(p)).allclose(mo.from_uw(mo.MoebElement(-u, one(dim))), 1e-12)
        assert np.allclose(mo.moebius_apply(mo.from_uw(p), u), 0.0, atol=1e-12)


def test_inverse_closed_form(rng):
    for dim in (2, 3):
        for _ in range(50):
            g = mo.random_element(rng, dim, 0.9)
            h = mo.to_uw(mo.inverse_matrix(mo.from_uw(g)))
            assert mo.from_uw(mo.inverse(g)).max_abs_diff(mo.from_uw(h)) < 1e-12


def test_moebius_maps_infinity():
    g = mo.MoebElement(np.array([0.5, 0.0]), one(2))
    y = mo.moebius_apply(mo.from_uw(g), mo.INFINITY)
    assert not mo.is_infinity(y)
    assert np.linalg.norm(y) == pytest.approx(2.0)


def test_haar_density():
    assert mo.haar_density(np.zeros(2)) == pytest.approx(1.0)
    assert mo.haar_density(np.array([0.5, 0.0])) == pytest.approx(16 / 9)


def test_haar_left_invariance():
    # the integral of a bump against the Haar density is unchanged when the bump is moved by g
    rng = np.random.default_rng(3)
    n = 20_000
    r = np.sqrt(rng.uniform(size=n)) * 0.999
    th = rng.uniform(0, 2 * np.pi, n)
    pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    dens = np.array([mo.haar_density(p) for p in pts])

    def bump(p):
        return np.exp(-20 * np.sum((p - [0.2, 0.1]) ** 2, axis=1))

    base = np.mean(bump(pts) * dens)
    for _ in range(3):
        M = mo.from_uw(mo.random_element(rng, 2, 0.4))
        moved = np.array([mo.moebius_apply(M, p) for p in pts])
        assert np.mean(bump(moved) * dens) == pytest.approx(base, rel=0.1)


def _vacuum_norm_density(shift=None):
    from cliffspec.analysis import vacuum_transform
    from cliffspec.clifford_core import conjugation, geometric_product

    def f(u, w):
        g = mo.MoebElement(u, w)
        if shift is not None:
            g = mo.compose(shift, g)
        W = vacuum_transform(g)
        return geometric_product(conjugation(W), W)

    return f


def test_hardy_vacuum_norm_finite_and_stable():
    w_nodes = mo.rotation_nodes(2, 4)
    h1 = mo.hardy_functional(_vacuum_norm_density(), 2, r=0.9, w_nodes=w_nodes)
    h2 = mo.hardy_functional(_vacuum_norm_density(), 2, r=0.99, w_nodes=w_nodes)
    assert 0 < h1.coeffs[0] < np.inf
    assert h1.allclose(h2, 1e-3)


def test_hardy_left_invariance():
    w_nodes = mo.rotation_nodes(2, 4)
    shift = mo.MoebElement(np.array([0.3, -0.2]), Multivector.scalar(2))
    base, _ = mo.hardy_limit(_vacuum_norm_density(), 2, w_nodes=w_nodes)
    moved, _ = mo.hardy_limit(_vacuum_norm_density(shift), 2, w_nodes=w_nodes)
    assert np.allclose(base.coeffs, moved.coeffs, atol=1e-3)


def test_random_element_in_ball(rng):
    for _ in range(100):
        g = mo.random_element(rng, 3, 0.5)
        assert np.linalg.norm(g.u) <= 0.5 + 1e-12


def test_json_round_trip(rng):
    g = mo.random_element(rng, 3, 0.9)
    h = mo.MoebElement.from_json(g.to_json())
    assert mo.from_uw(g).max_abs_diff(mo.from_uw(h)) < 1e-15
    assert math.isclose(float(np.linalg.norm(h.u)), float(np.linalg.norm(g.u)))
