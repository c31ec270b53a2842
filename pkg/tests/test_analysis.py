import numpy as np
import pytest

from cliffspec import analysis as an
from cliffspec import moebius as mo
from cliffspec.clifford_core import Multivector, modulus
from cliffspec.errors import QuadratureError


def test_inner_product_normalised():
    v = an.vacuum(2)
    assert an.inner_product(v, v).allclose(Multivector.scalar(2), 1e-14)
    v3 = an.vacuum(3)
    assert an.inner_product(v3, v3).allclose(Multivector.scalar(3), 1e-12)


def test_fourier_orthogonality():
    for j in range(5):
        for k in range(5):
            val = an.to_complex(an.inner_product(an.complex_power(j), an.complex_power(k)))
            assert abs(val - (1.0 if j == k else 0.0)) < 1e-12


def test_rho1_identity(rng):
    f = an.v_basis((0, 2), 2)
    quad = an.default_rule(2)
    g = an.rho1_apply(mo.MoebElement.identity(2), f)
    assert np.allclose(g(quad.nodes), f(quad.nodes))


def test_coherent_state_at_identity():
    f = an.coherent_state(mo.MoebElement.identity(3))
    quad = an.default_rule(3)
    assert np.allclose(f(quad.nodes), an.vacuum(3)(quad.nodes))


@pytest.mark.parametrize("dim", [2, 3])
def test_vacuum_transform_closed_form(dim, rng):
    for _ in range(5):
        g = mo.random_element(rng, dim, 0.5)
        M = mo.from_uw(g)
        a = M.a
        from cliffspec.clifford_core import reversion

        expected = reversion(a) / modulus(a) ** dim
        assert an.vacuum_transform(g).allclose(expected, 1e-12)
        tol = 1e-10 if dim == 2 else 1e-5
        assert an.wavelet_transform(an.vacuum(dim), g).allclose(expected, tol)


def test_vacuum_transform_simplification(rng):
    for dim in (2, 3):
        u = mo.random_ball_point(rng, dim, 0.9)
        w = mo.random_element(rng, dim, 0.1).w
        val = an.vacuum_transform(mo.MoebElement(u, w))
        from cliffspec.clifford_core import reversion

        assert val.allclose(reversion(w) * (1 - u @ u) ** ((dim - 1) / 2), 1e-12)


def test_vacuum_transform_identity():
    assert an.vacuum_transform(mo.MoebElement.identity(2)).allclose(Multivector.scalar(2))


def test_cauchy_reproduces_powers(rng):
    quad = an.sphere_rule(2, 512)
    for k in range(9):
        for _ in range(5):
            u = mo.random_ball_point(rng, 2, 0.8)
            val = an.cauchy_integral(an.complex_power(k), u, quad)
            assert abs(an.to_complex(val) - complex(*u) ** k) < 1e-8


def test_cauchy_constant_n3(rng):
    u = mo.random_ball_point(rng, 3, 0.5)
    assert an.cauchy_integral(an.vacuum(3), u).allclose(Multivector.scalar(3), 1e-4)


def test_cauchy_margin():
    with pytest.raises(QuadratureError):
        an.cauchy_integral(an.vacuum(2), np.array([0.999, 0.0]))


def test_v_basis_zero_is_vacuum():
    quad = an.default_rule(3)
    assert np.allclose(an.v_basis((0, 0, 0), 3)(quad.nodes), an.vacuum(3)(quad.nodes))


@pytest.mark.parametrize("dim,K,tol", [(2, 4, 1e-12), (3, 3, 1e-6)])
def test_v_basis_orthonormal(dim, K, tol):
    idx = an.indices_up_to(dim, K)
    quad = an.sphere_rule(dim, 512 if dim == 2 else 35)
    G = np.array([[an.inner_product(an.v_basis(a, dim), an.v_basis(b, dim), quad).coeffs for b in idx] for a in idx])
    assert np.abs(G[..., 0] - np.eye(len(idx))).max() < tol
    assert np.abs(G[..., 1:]).max() < tol


def test_creation_annihilation():
    assert an.creation((0, 1, 0), 2) == (0, 2, 0)
    assert an.annihilation((0, 3, 1), 2) == ((0, 2, 1), 3)
    assert an.annihilation((0, 0, 1), 2)[1] == 0


def test_token_identity_is_delta():
    idx, T = an.token_matrix(mo.MoebElement.identity(2), 3)
    assert np.allclose(T[..., 0], np.eye(len(idx)), atol=1e-12)
    assert np.allclose(T[..., 1:], 0.0, atol=1e-12)


def test_token_homomorphism(rng):
    g1, g2 = mo.random_element(rng, 2, 0.3), mo.random_element(rng, 2, 0.3)
    K = 8
    _, T1 = an.token_matrix(g1, K)
    _, T2 = an.token_matrix(g2, K)
    _, T12 = an.token_matrix(mo.compose(g1, g2), K)
    prod = an.clifford_matmul(T1, T2, 2)
    # the truncated product is accurate on the low-order corner
    low = len(an.indices_up_to(2, 2))
    assert np.abs(prod[:low, :low] - T12[:low, :low]).max() < 1e-6


def test_token_coeff_matches_matrix(rng):
    g = mo.random_element(rng, 2, 0.5)
    idx, T = an.token_matrix(g, 2)
    for li, l in enumerate(idx):
        for ki, k in enumerate(idx):
            assert np.allclose(an.token_coeff(k, l, g).coeffs, T[li, ki], atol=1e-12)


def test_rho1_representation_and_unitarity():
    from cliffspec import checks

    rep, uni = checks.rho1_errors(seed=11, draws=10, dim=2)
    assert rep < 1e-8 and uni < 1e-8
