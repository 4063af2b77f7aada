import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcsheet.errors import ConstraintError
from rcsheet.fieldcalc import GridSpec, HolomorphicField, Point2
from rcsheet.geometry import Metric2, curvature_of, gauss_curvature, levi_civita
from rcsheet.gravity2d import (
    Branch,
    ClassIISolution,
    ClassISolution,
    ConformalGaugeState,
    Couplings,
    action_eval,
    class1_build,
    class2_build,
    constant_case_invariants,
    curvature_factorization_residual,
    el_residual,
    field_invariants,
    katanaev_scalar,
    lagrangian,
    metric_from_torsion_check,
    theorem3_residual,
    zweibein_residual,
)

seeds = st.integers(0, 2**32 - 1)
UNIT = Couplings(1.0, 1.0, 4.0)  # Lambda = 16


def disk_points(radius, n):
    g = GridSpec(-radius, radius, -radius, radius, n, n)
    p = g.points()
    inside = p.u1**2 + p.u2**2 <= radius**2
    return Point2(p.u1[inside], p.u2[inside])


def sphere_state():
    sol = ClassISolution(Branch.LOWER, 1.0, 1.0, 0.0, HolomorphicField.identity(), UNIT)
    return class1_build(sol)


def class2_state(w=None, grid=None):
    w = HolomorphicField.identity() if w is None else w
    grid = GridSpec.square(0.5, 11) if grid is None else grid
    sol = ClassIISolution(Couplings.from_Lambda(2.0), 0.0, 1.0, w)
    return sol, class2_build(sol, grid)


# ---------------------------------------------------------------------------
# couplings and Lagrangian


def test_lagrangian_examples():
    assert lagrangian(0.0, 0.0, Couplings(1, 1, 0)) == 0.0
    assert lagrangian(2.0, 0.0, Couplings(1, 1, 1)) == 2.0
    assert lagrangian(0.0, 1.0, Couplings(1, 1, 0)) == 0.5


def test_couplings_validation_and_scales():
    with pytest.raises(ValueError):
        Couplings(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        Couplings(1.0, 1.0, -1.0)
    c = Couplings.from_Lambda(16.0)
    assert c.lam == pytest.approx(4.0) and c.Lambda == pytest.approx(16.0)
    assert c.l0 == pytest.approx(np.sqrt(2.0))


@settings(max_examples=30, deadline=None)
@given(factor=st.floats(0.1, 10.0))
def test_scaling_leaves_dimensionless_solution_unchanged(factor):
    c = Couplings(1.0, 1.0, 4.0)
    s = c.scaled(factor)
    assert s.Lambda == pytest.approx(c.Lambda, rel=1e-14)
    assert s.l0 == pytest.approx(c.l0, rel=1e-14)
    w = HolomorphicField.identity()
    g = GridSpec.square(1.0, 9)
    a = class1_build(ClassISolution(Branch.LOWER, 1.0, 1.0, 0.0, w, c)).sample(g)
    b = class1_build(ClassISolution(Branch.LOWER, 1.0, 1.0, 0.0, w, s)).sample(g)
    for x, y in zip(a[1:], b[1:]):
        np.testing.assert_array_equal(x, y)


def test_constant_case_invariants_examples():
    inv = constant_case_invariants(Couplings(1, 1, 1))
    assert inv.Lambda == 4.0 and (inv.R0_plus, inv.R0_minus) == (2.0, -2.0) and inv.residual == 0.0
    assert constant_case_invariants(Couplings(1, 1, 0)).R0_plus == 0.0
    inv = constant_case_invariants(Couplings(1, 2, 2))
    assert inv.Lambda == 2.0 and inv.R0_plus == pytest.approx(2 * np.sqrt(2), abs=1e-15)
    assert inv.residual <= 1e-15


# ---------------------------------------------------------------------------
# class (i)


def test_sphere_state_conformal_factor():
    st_ = sphere_state()
    assert st_.conformal_factor()((0.0, 0.0)) == 1.0
    p = disk_points(2.0, 9)
    np.testing.assert_allclose(st_.conformal_factor()(p), (1 + p.u1**2 + p.u2**2) ** -2, rtol=1e-14)


def test_sphere_state_field_equations():
    st_ = sphere_state()
    p = disk_points(2.0, 21)
    assert el_residual(st_, UNIT, p).max <= 1e-8
    inv = field_invariants(st_, p)
    np.testing.assert_allclose(np.abs(inv.R), 4.0, atol=1e-8)
    assert np.max(inv.torsion_sq) == 0.0
    assert max(np.max(np.abs(r)) for r in theorem3_residual(st_.phi, st_.f, 16.0, p)) <= 1e-8


def test_sphere_state_zweibein_and_factorization():
    st_ = sphere_state()
    p = disk_points(2.0, 11)
    conn_res, metric_res = zweibein_residual(st_, p)
    assert conn_res <= 1e-9 and metric_res <= 1e-12
    assert curvature_factorization_residual(st_, p) <= 1e-8
    R, t = katanaev_scalar(st_, p)
    np.testing.assert_allclose(R, field_invariants(st_, p).R, atol=1e-10)
    np.testing.assert_allclose(np.abs(R), 4.0, atol=1e-8)
    assert np.max(np.abs(t)) <= 1e-10


def test_sphere_gauss_curvature_ratio():
    # physical metric 2 e^{-2 phi} delta: Gauss curvature 2, so |R| / K = 2
    st_ = sphere_state()
    p = disk_points(1.0, 7)
    K = gauss_curvature(st_.metric(), p)
    np.testing.assert_allclose(np.abs(field_invariants(st_, p).R) / K, 2.0, atol=1e-10)


def test_class1_rejects_wrong_constraint():
    c = Couplings.from_Lambda(1.0)
    with pytest.raises(ConstraintError):
        class1_build(ClassISolution(Branch.LOWER, 1.0, 1.0, 0.0, HolomorphicField.identity(), c))


def test_class1_rejects_vanishing_denominator():
    # upper branch: a d - |b|^2 = -1 with a = 0, b = 1; D = 2x + d vanishes inside
    sol = ClassISolution(Branch.UPPER, 0.0, 0.0, 1.0, HolomorphicField.identity(), UNIT)
    with pytest.raises(ConstraintError):
        class1_build(sol, GridSpec.square(1.0, 5))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, branch=st.sampled_from(list(Branch)))
def test_branch_constraint_sign(seed, branch):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.2, 2.0)
    b = complex(*rng.uniform(-1, 1, 2))
    target = branch.sign * np.sqrt(16.0) / 4
    d = (target + abs(b) ** 2) / a
    sol = ClassISolution(branch, a, d, b, HolomorphicField.identity(), UNIT)
    assert abs(sol.constraint_residual()) <= 1e-12
    assert np.sign(a * d - abs(b) ** 2) == branch.sign
    other = Branch.UPPER if branch is Branch.LOWER else Branch.LOWER
    with pytest.raises(ConstraintError):
        class1_build(ClassISolution(other, a, d, b, HolomorphicField.identity(), UNIT))


@settings(max_examples=10, deadline=None)
@given(seed=seeds)
def test_theorem3_soundness_class1(seed):
    rng = np.random.default_rng(seed)
    alpha = complex(*rng.uniform(0.5, 1.5, 2))
    beta = complex(*rng.uniform(-0.3, 0.3, 2))
    w = HolomorphicField.polynomial([beta, alpha])
    branch = Branch.LOWER
    a = rng.uniform(0.5, 1.5)
    b = complex(*rng.uniform(-0.2, 0.2, 2))
    d = (1.0 + abs(b) ** 2) / a
    st_ = class1_build(ClassISolution(branch, a, d, b, w, UNIT), GridSpec.square(0.5, 5))
    p = disk_points(0.5, 7)
    assert max(np.max(np.abs(r)) for r in theorem3_residual(st_.phi, st_.f, 16.0, p)) <= 1e-8
    assert el_residual(st_, UNIT, p).max <= 1e-6


def test_theorem3_trivial_and_generic():
    p = disk_points(1.0, 5)
    assert all(np.max(np.abs(r)) == 0 for r in theorem3_residual(0.0, 0.0, 0.0, p))
    r = theorem3_residual("0.3*sin(x)*y", "0.2*x^2 + y", 1.0, p)
    assert max(np.max(np.abs(x)) for x in r) > 1e-2


def test_non_solution_trace():
    # torsion-free unit sphere metric: R^2 = 4 but lam = 4 needs R^2 = 16
    st_ = ConformalGaugeState("ln(1 + (x^2 + y^2)/2)", 0.0, UNIT)
    p = disk_points(0.5, 5)
    res = el_residual(st_, UNIT, p)
    R = field_invariants(st_, p).R
    np.testing.assert_allclose(res.trace, 0.5 * (R**2 - 16.0) * st_.metric().at(p)[0, 0], rtol=1e-8)
    assert np.max(np.abs(res.trace)) > 1.0


# ---------------------------------------------------------------------------
# class (ii)


def test_class2_initial_slope_examples():
    w = HolomorphicField.identity()
    c = Couplings.from_Lambda(2.0)
    assert ClassIISolution(c, 0.0, 1.0, w).initial_slope() == pytest.approx(np.e / 4, abs=1e-15)
    bad = ClassIISolution(c, 0.0, 3.0, w)
    assert bad.initial_slope() < 0
    with pytest.raises(ConstraintError):
        class2_build(bad, GridSpec.square(0.5, 5))


def test_class2_state_solves_field_equations():
    sol, st_ = class2_state()
    p = GridSpec.square(0.5, 11).points()
    assert st_.table.ode_residual() <= 1e-10
    assert el_residual(st_, sol.couplings, p).max <= 1e-6
    assert max(np.max(np.abs(r)) for r in theorem3_residual(st_.phi, st_.f, 2.0, p)) <= 1e-6


def test_class2_invariants_match_geometry():
    sol, st_ = class2_state()
    p = GridSpec.square(0.5, 9).points()
    inv = field_invariants(st_, p)
    h = st_.aux(p)
    xi = 2 * p.u1
    hp = st_.table.slope(xi)
    np.testing.assert_allclose(inv.R, -h, atol=1e-6)
    np.testing.assert_allclose(inv.torsion_sq, 4 * hp * np.exp(-h), atol=1e-6)
    R, _ = katanaev_scalar(st_, p)
    np.testing.assert_allclose(R, -h, atol=1e-6)
    assert curvature_factorization_residual(st_, p) <= 1e-8
    assert zweibein_residual(st_, p)[0] <= 1e-9


def test_class2_metric_from_torsion():
    sol, st_ = class2_state()
    p = GridSpec.square(0.5, 9).points()
    assert np.max(np.abs(metric_from_torsion_check(sol, st_, p))) <= 1e-8
    bumped = ConformalGaugeState(st_.phi + 1e-3, st_.f, st_.couplings, aux=st_.aux)
    res = metric_from_torsion_check(sol, bumped, p)
    # both sides move: e^{-2 phi} by e^{-2 delta}, T^2 through the metric by e^{2 delta}
    np.testing.assert_allclose(res, -2 * np.sinh(2e-3) * st_.conformal_factor()(p), atol=1e-8)
    assert np.max(np.abs(res)) > 1e-3


@settings(max_examples=5, deadline=None)
@given(seed=seeds)
def test_theorem3_soundness_class2(seed):
    rng = np.random.default_rng(seed)
    alpha = complex(*rng.uniform(0.5, 1.0, 2))
    w = HolomorphicField.polynomial([0.0, alpha])
    grid = GridSpec.square(0.3, 7)
    sol, st_ = class2_state(w, grid)
    p = grid.points()
    assert max(np.max(np.abs(r)) for r in theorem3_residual(st_.phi, st_.f, 2.0, p)) <= 1e-6
    assert el_residual(st_, sol.couplings, p).max <= 1e-6


def test_katanaev_matches_levi_civita_curvature_for_flat_vacuum():
    st_ = ConformalGaugeState(0.0, 0.0, Couplings(1, 1, 0))
    p = disk_points(1.0, 5)
    R, t = katanaev_scalar(st_, p)
    assert np.all(R == 0) and np.all(t == 0)
    assert np.max(np.abs(curvature_of(levi_civita(Metric2.euclidean()), None, p).R)) == 0


# ---------------------------------------------------------------------------
# action


def test_flat_vacuum_actions():
    g = GridSpec(0, 1, 0, 1, 9, 9)
    assert action_eval(ConformalGaugeState(0.0, 0.0, Couplings(1, 1, 0)), Couplings(1, 1, 0), g).action == 0.0
    rep = action_eval(ConformalGaugeState(0.0, 0.0, Couplings(1, 1, 1)), Couplings(1, 1, 1), g)
    assert rep.action == pytest.approx(1.0, abs=1e-14)
    assert rep.area == pytest.approx(1.0, abs=1e-14)


def test_sphere_area_and_gauss_bonnet():
    rep = action_eval(sphere_state(), UNIT, GridSpec.disk(1.0, 32), plane_radius=8.0)
    assert rep.area == pytest.approx(np.pi, rel=1e-2)
    assert rep.gauss_bonnet == pytest.approx(4 * np.pi, rel=1e-2)
    assert rep.chi_gauss_bonnet == pytest.approx(2.0, rel=1e-2)
    assert rep.chi_r0 == pytest.approx(1.0, rel=1e-2)
