import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import random_conformal_factor, random_difference, random_field, random_metric, random_points
from rcsheet.dislocation import Frame2, teleparallel_connection, vectorial_connection
from rcsheet.errors import ConstraintError, SingularMetricError
from rcsheet.fieldcalc import Point2, eval_jet, parse_field
from rcsheet.geometry import (
    AreaForm2,
    Bivector2,
    Connection2,
    Metric2,
    VectorField2,
    assemble_connection,
    canonical_transform,
    covariant_derivative,
    curvature_of,
    density_identity_residuals,
    density_tensors,
    div_a,
    div_omega,
    gauss_curvature,
    grad_a,
    gradient,
    holonomy_defect,
    levi_civita,
    nonmetricity_of,
    pentagon_closure,
    ricci_identity_residuals,
    statement1_residual,
    torsion_of,
    vectorial_torsion_residual,
    volume_compatibility,
    weyl_cartan_connection,
)

seeds = st.integers(0, 2**32 - 1)
SPHERE = "ln(1+x^2+y^2)"


def random_connection(rng):
    a = random_metric(rng)
    return a, assemble_connection(a, random_difference(rng))


# ---------------------------------------------------------------------------
# Levi-Civita and curvature oracles


def test_euclidean_christoffels_vanish():
    G = levi_civita(Metric2.euclidean()).at(Point2(np.array([0.3, -1.0]), np.array([2.0, 0.1])))
    assert np.all(G == 0)


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_conformal_christoffel_oracle(seed):
    # a = exp(-2 phi) delta: Gamma^k_ab = -d^k_a phi_b - d^k_b phi_a + d_ab phi_k
    rng = np.random.default_rng(seed)
    phi = random_conformal_factor(rng)
    p = random_points(rng, 5)
    G = levi_civita(Metric2.conformal(phi)).at(p)
    J = eval_jet(phi, p, 1)
    dphi = np.stack([J.partial(1, 0), J.partial(0, 1)])
    d = np.eye(2)[..., None]
    oracle = (
        -np.einsum("ka...,b...->kab...", d, dphi)
        - np.einsum("kb...,a...->kab...", d, dphi)
        + np.einsum("ab...,k...->kab...", d, dphi)
    )
    np.testing.assert_allclose(G, oracle, atol=1e-12)


def test_conformal_christoffels_phi_x():
    G = levi_civita(Metric2.conformal("x")).at((0.4, -0.2))
    expected = np.zeros((2, 2, 2))
    expected[0, 0, 0] = -1
    expected[0, 1, 1] = 1
    expected[1, 0, 1] = expected[1, 1, 0] = -1
    np.testing.assert_allclose(G, expected, atol=1e-14)


def test_polar_christoffels():
    a = Metric2(1.0, 0.0, "x^2")
    x = 1.7
    G = levi_civita(a).at((x, 0.3))
    expected = np.zeros((2, 2, 2))
    expected[0, 1, 1] = -x
    expected[1, 0, 1] = expected[1, 1, 0] = 1 / x
    np.testing.assert_allclose(G, expected, atol=1e-14)


def test_singular_metric_raises():
    with pytest.raises(SingularMetricError):
        Metric2(1.0, 0.0, "x^2").jets((0.0, 0.0))
    with pytest.raises(SingularMetricError):
        Metric2(1.0, 1.0, 1.0).at((0.0, 0.0))


def test_sphere_gauss_curvature():
    p = random_points(np.random.default_rng(0), 20, 2.0)
    np.testing.assert_allclose(gauss_curvature(Metric2.conformal(SPHERE), p), 4.0, atol=1e-10)
    np.testing.assert_allclose(gauss_curvature(Metric2.conformal(SPHERE, scale=4.0), p), 1.0, atol=1e-10)
    assert np.all(gauss_curvature(Metric2.euclidean(), p) == 0)


def test_half_plane_gauss_curvature():
    rng = np.random.default_rng(1)
    p = Point2(rng.uniform(-2, 2, 20), rng.uniform(0.2, 3, 20))
    np.testing.assert_allclose(gauss_curvature(Metric2.conformal("ln(y)"), p), -1.0, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_gauss_curvature_conformal_oracle(seed):
    # K = exp(2 phi) Laplacian(phi) for exp(-2 phi) delta
    rng = np.random.default_rng(seed)
    phi = random_conformal_factor(rng)
    p = random_points(rng, 6)
    J = eval_jet(phi, p, 2)
    lap = J.partial(2, 0) + J.partial(0, 2)
    np.testing.assert_allclose(gauss_curvature(Metric2.conformal(phi), p), np.exp(2 * J.value) * lap, atol=1e-10)


def test_zero_connection_is_flat():
    cur = curvature_of(Connection2.zero(), Metric2.euclidean(), (0.2, 0.1))
    assert np.all(cur.R == 0) and cur.scalar == 0


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_curvature_symmetries(seed):
    rng = np.random.default_rng(seed)
    a, c = random_connection(rng)
    p = random_points(rng, 5)
    cur = curvature_of(c, a, p)
    R, ric = cur.R, cur.ricci
    np.testing.assert_allclose(R, -np.swapaxes(R, 0, 1), atol=1e-12)
    # R_ab - R_ba = -R_{abk}^k
    np.testing.assert_allclose(ric - np.swapaxes(ric, 0, 1), -np.einsum("abkk...->ab...", R), atol=1e-10)
    lc = curvature_of(levi_civita(a), a, p).ricci
    np.testing.assert_allclose(lc, np.swapaxes(lc, 0, 1), atol=1e-10)


def test_levi_civita_is_torsion_free():
    rng = np.random.default_rng(3)
    tor = torsion_of(levi_civita(random_metric(rng)), random_points(rng, 10))
    assert np.max(np.abs(tor.S)) <= 1e-12


def test_levi_civita_scalar_is_twice_gauss():
    rng = np.random.default_rng(4)
    a = random_metric(rng)
    p = random_points(rng, 10)
    np.testing.assert_allclose(curvature_of(levi_civita(a), a, p).scalar, 2 * gauss_curvature(a, p), atol=1e-10)


# ---------------------------------------------------------------------------
# identities


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_statement1_identity(seed):
    rng = np.random.default_rng(seed)
    _, c = random_connection(rng)
    assert statement1_residual(c, random_points(rng, 20)) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=seeds)
def test_ricci_identities(seed):
    rng = np.random.default_rng(seed)
    _, c = random_connection(rng)
    f = random_field(rng)
    u = VectorField2(random_field(rng), random_field(rng))
    rs, rv = ricci_identity_residuals(c, f, u, random_points(rng, 10))
    assert rs <= 1e-8 and rv <= 1e-8


def test_ricci_identity_torsion_term_is_needed():
    # the commutator of a scalar picks up torsion: a symmetric-connection check would fail
    c = vectorial_connection(Metric2.euclidean(), VectorField2(1.0, 0.3, covariant=True))
    f = parse_field("x*y + x^2")
    G = c.at((0.1, 0.2))
    assert np.max(np.abs(G - np.swapaxes(G, 1, 2))) > 0.1
    rs, _ = ricci_identity_residuals(c, f, VectorField2("y", "x"), (0.1, 0.2))
    assert rs <= 1e-12


def test_density_identities():
    rng = np.random.default_rng(5)
    a = random_metric(rng)
    p = random_points(rng, 20)
    r1, r2 = density_identity_residuals(a, p)
    assert r1 <= 1e-12 and r2 <= 1e-12
    lo, up = density_tensors(a, p)
    np.testing.assert_allclose(lo[0, 1] * up[0, 1], 1.0)


def test_orthonormal_frame_determinant():
    rng = np.random.default_rng(6)
    phi = random_conformal_factor(rng)
    p = random_points(rng, 10)
    a = Metric2.conformal(phi)
    _, _, det = Frame2.conformal(phi).at(p)
    np.testing.assert_allclose(det, 1 / a.jets(p, 0).sqrt_det.value, rtol=1e-10)


# ---------------------------------------------------------------------------
# torsion and decompositions


def test_symmetric_connection_has_no_torsion():
    tor = torsion_of(levi_civita(Metric2.conformal(SPHERE)), (0.3, 0.4))
    assert np.all(tor.S == 0) and np.all(tor.t == 0)


def test_vectorial_torsion_components():
    # T_{ab}^k = t_b d^k_a - t_a d^k_b, so T_12^2 = -t_1 and the trace T_{ak}^k is -t
    c = vectorial_connection(Metric2.euclidean(), VectorField2(1.0, 0.0, covariant=True))
    tor = torsion_of(c, (0.0, 0.0))
    assert tor.T[0, 1, 1] == pytest.approx(-1.0)
    assert tor.T[0, 1, 0] == pytest.approx(0.0)
    np.testing.assert_allclose(tor.t, [-1.0, 0.0])
    np.testing.assert_allclose(tor.t_vol, [1.0, 0.0])


def test_teleparallel_frame_torsion():
    e = Frame2(("1", "0"), ("0", "exp(x)"))
    tor = torsion_of(teleparallel_connection(e), (0.3, -0.4))
    assert tor.T[0, 1, 1] == pytest.approx(-1.0, abs=1e-14)
    assert tor.T[0, 1, 0] == pytest.approx(0.0, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_decomposition_round_trips(seed):
    rng = np.random.default_rng(seed)
    a, c = random_connection(rng)
    p = random_points(rng, 10)
    tor = torsion_of(c, p)
    assert vectorial_torsion_residual(tor) <= 1e-12
    assert np.max(np.abs(tor.S + np.swapaxes(tor.S, 0, 1))) == 0
    # traceless part of a 2D torsion vanishes identically
    assert np.max(np.abs(tor.L)) <= 1e-12
    nm = nonmetricity_of(c, a, p)
    assert np.max(np.abs(nm.Q - nm.difference)) <= 1e-12
    inv = a.jets(p, 0).inv
    inv = np.stack([np.stack([inv[i][j].value for j in range(2)]) for i in range(2)])
    assert np.max(np.abs(np.einsum("ns...,ans...->a...", inv, nm.P))) <= 1e-12


def test_levi_civita_decomposition_vanishes():
    rng = np.random.default_rng(7)
    a = random_metric(rng)
    nm = nonmetricity_of(levi_civita(a), a, random_points(rng, 5))
    for arr in (nm.W, nm.P, nm.w, nm.V, nm.K, nm.Q):
        assert np.max(np.abs(arr)) <= 1e-12


@settings(max_examples=15, deadline=None)
@given(seed=seeds)
def test_gradient_torsion_difference_tensor(seed):
    # metric, so V = 0 and Q = K = t_n a_as - t_s a_an for t = d phi
    rng = np.random.default_rng(seed)
    a = random_metric(rng)
    phi = random_field(rng, 2)
    p = random_points(rng, 5)
    nm = nonmetricity_of(vectorial_connection(a, gradient(phi)), a, p)
    assert np.max(np.abs(nm.W)) <= 1e-10
    np.testing.assert_allclose(nm.Q, nm.K, atol=1e-12)
    t = gradient(phi).at(p)
    g = a.at(p)
    expected = np.einsum("n...,as...->ans...", t, g) - np.einsum("s...,an...->ans...", t, g)
    np.testing.assert_allclose(nm.Q, expected, atol=1e-10)


@settings(max_examples=15, deadline=None)
@given(seed=seeds)
def test_weyl_cartan_round_trip(seed):
    rng = np.random.default_rng(seed)
    a = random_metric(rng)
    w = VectorField2(random_field(rng, 2), random_field(rng, 2), covariant=True)
    p = random_points(rng, 5)
    nm = nonmetricity_of(weyl_cartan_connection(a, w), a, p)
    assert np.max(np.abs(nm.P)) <= 1e-10
    np.testing.assert_allclose(nm.w, w.at(p), atol=1e-10)


def test_assemble_with_zero_difference_is_levi_civita():
    rng = np.random.default_rng(8)
    a = random_metric(rng)
    p = random_points(rng, 5)
    zero = [[[0.0] * 2] * 2] * 2
    np.testing.assert_array_equal(assemble_connection(a, zero).at(p), levi_civita(a).at(p))


# ---------------------------------------------------------------------------
# pentagon and holonomy


def test_pentagon_closure():
    S = np.zeros((2, 2, 2))
    assert np.all(pentagon_closure(S, Bivector2(0.01)) == 0)
    S[0, 1, 1], S[1, 0, 1] = 0.5, -0.5  # T_12^2 = 1
    np.testing.assert_allclose(pentagon_closure(S, Bivector2(0.01)), [0.0, 0.01])
    np.testing.assert_allclose(pentagon_closure(S, Bivector2(0.01, -1)), [0.0, -0.01])
    with pytest.raises(ValueError):
        Bivector2(0.01, 0)


def _transport_loop(c, center, side, v, n=16):
    """Parallel transport around the square of the given side, d_1 first (RK4)."""
    x0, y0 = center[0] - side / 2, center[1] - side / 2
    corners = [(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side), (x0, y0)]
    v = np.array(v, dtype=float)
    for (xa, ya), (xb, yb) in zip(corners[:-1], corners[1:]):
        dx = np.array([xb - xa, yb - ya]) / n

        def rhs(s, vv):
            G = c.at((xa + s * dx[0] * n, ya + s * dx[1] * n))
            return -np.einsum("kab,a,b->k", G, dx * n, vv)

        h = 1.0 / n
        for i in range(n):
            s = i * h
            k1 = rhs(s, v)
            k2 = rhs(s + h / 2, v + h / 2 * k1)
            k3 = rhs(s + h / 2, v + h / 2 * k2)
            k4 = rhs(s + h, v + h * k3)
            v = v + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    return v


def test_holonomy_matches_loop_transport():
    c = levi_civita(Metric2.conformal(SPHERE))
    v = np.array([1.0, 0.0])
    eps = 1e-2
    q = [(_transport_loop(c, (0.0, 0.0), s, v) - v) / s**2 for s in (eps, eps / 2)]
    extrapolated = (4 * q[1] - q[0]) / 3 * eps**2
    dv = holonomy_defect(c, v, Bivector2(eps**2), (0.0, 0.0))
    assert np.max(np.abs(dv - extrapolated)) <= 1e-6 * np.max(np.abs(dv))
    np.testing.assert_allclose(holonomy_defect(c, v, Bivector2(2 * eps**2), (0.0, 0.0)), 2 * dv)


def test_flat_connection_has_no_holonomy():
    dv = holonomy_defect(Connection2.zero(), [1.0, 2.0], Bivector2(1e-3), (0.0, 0.0))
    assert np.all(dv == 0)


# ---------------------------------------------------------------------------
# divergence and volume compatibility


def test_flat_divergence():
    assert div_a(VectorField2("x", "y"), Metric2.euclidean(), (0.3, 0.9)) == pytest.approx(2.0)


def test_sphere_laplacian_of_log():
    a = Metric2.conformal(SPHERE)
    p = random_points(np.random.default_rng(9), 10, 2.0)
    np.testing.assert_allclose(div_a(grad_a(SPHERE, a), a, p), 4.0, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_divergence_product_rule(seed):
    rng = np.random.default_rng(seed)
    a = random_metric(rng)
    psi = random_field(rng, 2)
    w = VectorField2(random_field(rng, 2), random_field(rng, 2))
    p = random_points(rng, 5)
    lhs = div_omega(w, AreaForm2(a, psi), p)
    rhs = div_a(w, a, p) + np.einsum("a...,a...->...", w.at(p), gradient(psi).at(p))
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_levi_civita_compatible_with_metric_area():
    rng = np.random.default_rng(10)
    a = random_metric(rng)
    vc = volume_compatibility(levi_civita(a), a, AreaForm2(a), random_points(rng, 10))
    assert np.max(np.abs(vc.residual)) <= 1e-12 and vc.compatible_defect <= 1e-12


@settings(max_examples=15, deadline=None)
@given(seed=seeds)
def test_compatibility_formula_matches_lie_derivative(seed):
    # nabla_a w^a - div_omega w = residual . w for random w (independent route)
    rng = np.random.default_rng(seed)
    a, c = random_connection(rng)
    psi = random_field(rng, 2)
    w = VectorField2(random_field(rng, 2), random_field(rng, 2))
    p = random_points(rng, 5)
    omega = AreaForm2(a, psi)
    vc = volume_compatibility(c, a, omega, p)
    assert vc.formula_error <= 1e-10
    lhs = np.einsum("aa...->...", covariant_derivative(c, w, p)) - div_omega(w, omega, p)
    np.testing.assert_allclose(lhs, np.einsum("a...,a...->...", vc.residual, w.at(p)), atol=1e-10)


@settings(max_examples=15, deadline=None)
@given(seed=seeds)
def test_gradient_torsion_selects_one_sign(seed):
    rng = np.random.default_rng(seed)
    a = random_metric(rng)
    phi = random_field(rng, 2)
    p = random_points(rng, 5)
    c = vectorial_connection(a, gradient(phi))
    plus = volume_compatibility(c, a, AreaForm2(a, phi), p).compatible_defect
    minus = volume_compatibility(c, a, AreaForm2(a, -1.0 * phi), p).compatible_defect
    grad = np.max(np.abs(gradient(phi).at(p)))
    assert plus <= 1e-10
    assert minus >= 1.9 * grad - 1e-10


def test_non_gradient_torsion_incompatible():
    a = Metric2.euclidean()
    c = vectorial_connection(a, VectorField2("y", "0", covariant=True))
    vc = volume_compatibility(c, a, AreaForm2(a), Point2(np.array([0.0, 0.5]), np.array([0.3, -0.4])))
    assert vc.compatible_defect > 0.1


# ---------------------------------------------------------------------------
# canonical transformations


def test_constant_canonical_transform():
    a = Metric2.conformal(SPHERE)
    c = vectorial_connection(a, gradient("x*y"))
    a2, c2 = canonical_transform(a, c, np.log(2.0))
    p = random_points(np.random.default_rng(11), 5)
    np.testing.assert_allclose(a2.at(p), a.at(p) / 4, rtol=1e-14)
    np.testing.assert_allclose(c2.at(p), c.at(p), atol=1e-14)
    np.testing.assert_allclose(curvature_of(c2, a2, p).scalar, 4 * curvature_of(c, a, p).scalar, rtol=1e-12)


@settings(max_examples=15, deadline=None)
@given(seed=seeds)
def test_canonical_transform_invariants(seed):
    rng = np.random.default_rng(seed)
    a = random_metric(rng)
    c = vectorial_connection(a, gradient(random_field(rng, 2)))
    sigma = random_field(rng, 2)
    p = random_points(rng, 5)
    a2, c2 = canonical_transform(a, c, sigma, check_at=p)
    k1, k2 = curvature_of(c, a, p), curvature_of(c2, a2, p)
    np.testing.assert_allclose(k2.R, k1.R, atol=1e-9)
    np.testing.assert_allclose(k2.ricci, k1.ricci, atol=1e-9)
    np.testing.assert_allclose(k2.scalar, np.exp(2 * sigma(p)) * k1.scalar, atol=1e-9)
    t1, t2 = torsion_of(c, p), torsion_of(c2, p)
    np.testing.assert_allclose(t2.L, t1.L, atol=1e-12)
    np.testing.assert_allclose(t2.t, t1.t - gradient(sigma).at(p), atol=1e-12)
    assert np.max(np.abs(nonmetricity_of(c2, a2, p).W)) <= 1e-10


def test_canonical_transform_requires_metric_connection():
    rng = np.random.default_rng(12)
    a, c = random_connection(rng)
    with pytest.raises(ConstraintError):
        canonical_transform(a, c, "x", check_at=random_points(rng, 3))
