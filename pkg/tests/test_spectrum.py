import math
import warnings

import numpy as np
import pytest

from cliffspec import analysis as an
from cliffspec import moebius as mo
from cliffspec import spectrum as sp
from cliffspec.checks import random_jordan_trial
from cliffspec.clifford_core import Multivector
from cliffspec.errors import AmbiguityError, InputError, MapDegeneracyError


# complexification and Jordan structure -------------------------------------------------

def test_complexify_values():
    assert np.array_equal(sp.complexify([np.zeros((2, 2))] * 2), np.zeros((2, 2)))
    assert np.array_equal(sp.complexify(sp.pauli_pair()), np.array([[1, 1j], [1j, -1]]))
    D = sp.complexify([np.diag([1.0, 2.0]), np.diag([0.5, 0.0])])
    assert np.array_equal(D, np.diag([1 + 0.5j, 2]))
    with pytest.raises(InputError):
        sp.complexify([np.eye(2)] * 3)


def test_pauli_structure():
    js = sp.jordan_structure(sp.complexify(sp.pauli_pair()))
    assert len(js.clusters) == 1
    lam, sizes = js.clusters[0]
    assert abs(lam) < 1e-10 and list(sizes) == [2]


def test_distinct_diagonal():
    js = sp.jordan_structure(np.diag([0.1, -0.3j, 0.5 + 0.2j, -0.6]))
    assert sorted(list(s) for _, s in js.clusters) == [[1]] * 4


def test_figure_structure():
    js = sp.jordan_structure(sp.fig1_matrix())
    for u, size in zip(sp.fig1_eigenvalues(), sp.FIG1_SIZES):
        assert js.sizes_at(u) == [(size,)]


def test_similarity_recovers_blocks(rng):
    J = sp.jordan_matrix([(0.3 + 0.1j, 4), (0.3 + 0.1j, 2), (0.3 + 0.1j, 1), (-0.5, 2)])
    P = np.eye(9) + 0.3 * (rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))) / 3
    js = sp.jordan_structure(P @ J @ np.linalg.inv(P))
    assert js.sizes_at(0.3 + 0.1j) == [(4, 2, 1)]
    assert js.sizes_at(-0.5) == [(2,)]


def test_similarity_invariance_battery():
    bad = 0
    for seed in range(30):
        M, _, J = random_jordan_trial(np.random.default_rng(seed))
        bad += not sp.jordan_structure(M).matches(sp.jordan_structure(J), 1e-6)
    assert bad == 0


def test_rank_decisions_ambiguous():
    # a similar copy of a defective matrix cannot pass a nilpotency test at 1e-18
    M, _, _ = random_jordan_trial(np.random.default_rng(1))
    assert max(max(s) for _, s in sp.jordan_structure(M).clusters) > 1
    with pytest.raises(AmbiguityError):
        sp.jordan_structure(M, rank_tol=1e-18, cluster_tol=0.0)


def test_close_pair_inside_cluster_tol_flagged():
    # eigenvalues 1e-5 apart, within cluster_tol, but not a Jordan block at rank_tol
    M = np.array([[0.0, 1.0], [0.0, 1e-5]])
    with pytest.raises(AmbiguityError):
        sp.jordan_structure(M, cluster_tol=1e-4, rank_tol=1e-12)
    js = sp.jordan_structure(M, rank_tol=1e-12)
    assert sorted(s for _, s in js.clusters) == [(1,), (1,)]
    assert sp.jordan_structure(M).clusters[0][1] == (2,)


# joint spectrum ------------------------------------------------------------------------

def test_pauli_spectrum():
    S = sp.joint_spectrum(sp.pauli_pair())
    assert len(S) == 2
    assert sorted(k for _, k in S.points) == [0, 1]
    assert max(abs(u) for u, _ in S.points) < 1e-10


def test_figure_spectrum_points():
    S = sp.joint_spectrum(sp.fig1_matrix())
    assert len(S) == 10
    for (r, a), size in zip(sp.FIG1_VALUES, sp.FIG1_SIZES):
        u = r * complex(math.cos(a), math.sin(a))
        ks = sorted(k for v, k in S.points if abs(v - u) < 1e-8)
        assert ks == list(range(size))


def test_diagonal_differs_from_blocks():
    D = np.diag(sp.fig1_eigenvalues())
    S = sp.joint_spectrum(D)
    assert len(S) == 4 and all(k == 0 for _, k in S.points)
    assert set(sp.joint_spectrum(sp.fig1_matrix()).classical) != set() and len(S) != 10


def test_json_round_trip():
    S = sp.joint_spectrum(sp.fig1_matrix())
    doc = S.to_json()
    assert sp.JointSpectrum.from_json(doc) == S
    sizes = sorted(b["sizes"][0] for b in doc["blocks"])
    assert sizes == [1, 2, 3, 4]


def test_malformed_spectrum_json():
    with pytest.raises(InputError):
        sp.JointSpectrum.from_json({"points": [{"u": [0.0]}]})


def test_blocks_need_staircase():
    with pytest.raises(InputError):
        sp.JointSpectrum(((0j, 1),)).blocks()


# maps --------------------------------------------------------------------------------

def test_deg_of_zero_examples():
    assert sp.deg_of_zero(sp.HoloMap.identity(), 0.3 + 0.2j) == 1
    u = 0.2 - 0.1j
    cube = sp.HoloMap.poly(np.polynomial.polynomial.polyadd(np.polynomial.polynomial.polypow([-u, 1], 3), [0.4]))
    assert sp.deg_of_zero(cube, u) == 3
    sq = sp.HoloMap.poly([0, 0, 1])
    assert sp.deg_of_zero(sq, 0.0) == 2
    assert sp.deg_of_zero(sq, 0.5) == 1


def test_deg_of_zero_flat():
    with pytest.raises(MapDegeneracyError):
        sp.deg_of_zero(sp.HoloMap.poly([0.5]), 0.1)


def test_spectral_map_identity():
    S = sp.joint_spectrum(sp.fig1_matrix())
    assert sp.match_spectra(sp.spectral_map(S, sp.HoloMap.identity()), S, 1e-12)[0]


def test_figure_map_orders_and_image():
    phi = sp.fig1_phi()
    for u, order in zip(sp.fig1_eigenvalues(), sp.FIG1_ORDERS):
        assert sp.deg_of_zero(phi, u) == order
    S = sp.joint_spectrum(sp.fig1_matrix())
    mapped = sp.spectral_map(S, phi)
    u2 = sp.fig1_eigenvalues()[1]
    assert sorted(k for v, k in mapped.points if abs(v - phi(u2)) < 1e-8) == [0, 0, 0, 1]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        F = sp.matrix_function(phi, sp.fig1_matrix())
    ok, dist = sp.match_spectra(mapped, sp.joint_spectrum(F), 1e-6)
    assert ok and dist < 1e-9
    assert sp.jordan_structure(F).sizes_at(phi(u2)) == [(2, 1, 1)]


def test_figure_map_leaves_disk():
    with pytest.warns(RuntimeWarning):
        sp.fig1_phi().check_disk()


def test_disk_automorphism_keeps_orders():
    phi = sp.HoloMap.disk_automorphism(0.3 - 0.2j, 0.7)
    S = sp.joint_spectrum(sp.fig1_matrix())
    mapped = sp.spectral_map(S, phi)
    assert sorted(mapped.heights().values()) == sorted(S.heights().values())
    ok, _ = sp.match_spectra(mapped, sp.joint_spectrum(sp.matrix_function(phi, sp.fig1_matrix())), 1e-8)
    assert ok


def test_holomap_parse():
    phi = sp.HoloMap.parse("poly:1,0,2i")
    assert phi(1.0) == pytest.approx(1 + 2j)
    disk = sp.HoloMap.parse("disk:0.5,0")
    assert disk(0.5) == pytest.approx(0.0)
    with pytest.raises(InputError):
        sp.HoloMap.parse("exp:1")


def test_mobius_derivatives_match_difference_quotient():
    phi = sp.HoloMap.disk_automorphism(0.2 + 0.4j, 1.1)
    z, h = 0.1 - 0.3j, 1e-4
    d = phi.derivatives(z, 2)
    assert d[1] == pytest.approx((phi(z + h) - phi(z - h)) / (2 * h), rel=1e-6)
    assert d[2] == pytest.approx((phi(z + h) - 2 * phi(z) + phi(z - h)) / h**2, rel=1e-4)


# matrix functions --------------------------------------------------------------------

def test_matrix_function_identity_and_square():
    M = sp.fig1_matrix()
    assert np.abs(sp.matrix_function(sp.HoloMap.identity(), M) - M).max() < 1e-9
    J = sp.jordan_block(0.0, 2)
    assert np.abs(sp.matrix_function(sp.HoloMap.poly([0, 0, 1]), J)).max() < 1e-12


def test_matrix_function_matches_horner(rng):
    for seed in range(10):
        M, phi, _ = random_jordan_trial(np.random.default_rng(seed))
        ref = np.zeros_like(M)
        for c in phi.coeffs[::-1]:
            ref = ref @ M + c * np.eye(len(M))
        assert np.abs(sp.matrix_function(phi, M) - ref).max() < 1e-9


def test_matrix_function_warns_on_bad_similarity():
    J = np.diag([0.1, 0.1 + 1e-3]).astype(complex)
    J[0, 1] = 1.0
    with pytest.warns(RuntimeWarning, match="ill-conditioned"):
        F = sp.matrix_function(sp.HoloMap.poly([0, 0, 1]), J, cond_limit=10.0)
    assert np.abs(F - J @ J).max() < 1e-9


def test_spectral_mapping_battery():
    from cliffspec.checks import spectral_mapping_trials

    passed, rejected, failed, worst = spectral_mapping_trials(seed=5, trials=40)
    assert passed == 40 and not failed and worst < 1e-6


# jets --------------------------------------------------------------------------------

def test_jet_identity_map():
    j = sp.Jet(0.2 + 0.1j, np.array([1.0, 2.0, -1.0j]))
    assert sp.jet_prolong_map(sp.HoloMap.identity(), j, base=j.z).allclose(j)


def test_jet_chain_rule():
    # J(f o psi) for f = z^3, psi = Möbius: compare with derivatives of the composite
    psi = sp.HoloMap.disk_automorphism(0.3, 0.4)
    z0 = 0.1 + 0.2j
    w = complex(psi(z0))
    j = sp.Jet.of(sp.HoloMap.poly([0, 0, 0, 1]), w, 3)
    out = sp.jet_prolong_map(psi, j, base=z0)
    h = 1e-4
    comp = lambda z: psi(z) ** 3  # noqa: E731
    d1 = (comp(z0 + h) - comp(z0 - h)) / (2 * h)
    assert out.values[0] == pytest.approx(w**3)
    assert out.values[1] == pytest.approx(d1, rel=1e-6)


def test_rho1_jet_map_reproduces_action(rng):
    # for even elements rho_1(g) f = multiplier(zeta) * f(inner(zeta)) pointwise
    quad = an.sphere_rule(2, 64)
    f = an.v_basis((0, 2), 2)
    x = quad.nodes
    zeta = sp.zeta_of(x)
    for _ in range(5):
        g = mo.MoebElement(mo.random_ball_point(rng, 2, 0.7), Multivector.scalar(2))
        psi = sp.rho1_jet_map(g)
        assert not psi.reflect
        moved = sp.cl2_to_pair(f(sp.point_of(psi.inner(zeta))))
        expect = psi.multiplier(zeta)[:, None] * moved
        assert np.abs(sp.cl2_to_pair(an.rho1_apply(g, f)(x)) - expect).max() < 1e-12


@pytest.mark.parametrize("L,tol", [(1, 1e-8), (2, 1e-6), (3, 1e-4)])
def test_jordan_zero_equivalence(L, tol, rng):
    gs = [mo.random_element(rng, 2, 0.7) for _ in range(5)]
    assert sp.jordan_zero_equivalence(L, gs) < tol


def test_jordan_zero_identity_exact():
    assert sp.jordan_zero_equivalence(2, [mo.MoebElement.identity(2)]) < 1e-14


def test_jordan_zero_negative_control(rng):
    gs = [mo.random_element(rng, 2, 0.7) for _ in range(3)]
    hs = [mo.random_element(rng, 2, 0.7) for _ in range(3)]
    assert sp.jordan_zero_equivalence(2, gs, jet_gs=hs) > 1e-2


# rendering ---------------------------------------------------------------------------

def test_render_empty_and_deterministic():
    svg = sp.render_spectrum(sp.JointSpectrum(()))
    assert svg.startswith("<?xml") and "<svg" in svg
    assert svg == sp.render_spectrum(sp.JointSpectrum(()))


def test_render_labels():
    svg = sp.render_spectrum(sp.joint_spectrum(sp.fig1_matrix()))
    for h in ("3", "4", "1", "2"):
        assert f">{h}</text>" in svg
    pauli = sp.render_spectrum(sp.joint_spectrum(sp.pauli_pair()))
    assert ">2</text>" in pauli


def test_render_modes():
    S = sp.joint_spectrum(sp.fig1_matrix())
    mapped = sp.spectral_map(S, sp.HoloMap.disk_automorphism(0.1, 0.0))
    assert "<svg" in sp.render_spectrum(S, "classical")
    assert "<svg" in sp.render_spectrum(S, "mapped-pair", mapped)
    with pytest.raises(InputError):
        sp.render_spectrum(S, "mapped-pair")
