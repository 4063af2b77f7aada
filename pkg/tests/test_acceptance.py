"""The twelve acceptance criteria, each at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line before asserting, so a plain
``pytest`` run shows the verdicts even when output capture is on.
"""

import time

import numpy as np
import pytest

from builders import random_conformal_factor, random_difference, random_field, random_metric, random_points
from rcsheet.dislocation import flatness_defect, solve_flat_potential, vectorial_connection
from rcsheet.fieldcalc import GridSpec, HolomorphicField, Point2, eval_jet, fd_richardson
from rcsheet.geodesic import GeodesicState, conformal_geodesic, integrate_geodesic
from rcsheet.geometry import (
    AreaForm2,
    Metric2,
    VectorField2,
    assemble_connection,
    canonical_transform,
    covariant_derivative,
    curvature_of,
    gauss_curvature,
    grad_a,
    gradient,
    levi_civita,
    ricci_identity_residuals,
    statement1_residual,
    torsion_of,
    volume_compatibility,
)
from rcsheet.gravity2d import (
    Branch,
    ClassIISolution,
    ClassISolution,
    Couplings,
    action_eval,
    class1_build,
    class2_build,
    el_residual,
    field_invariants,
    metric_from_torsion_check,
)
from rcsheet.lattice import burgers, stone_wales_change, stone_wales_counts

SPHERE = "ln(1+x^2+y^2)"


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, detail

    return emit


def disk_points(radius, n):
    g = GridSpec(-radius, radius, -radius, radius, n, n)
    p = g.points()
    inside = p.u1**2 + p.u2**2 <= radius**2 + 1e-12
    return Point2(p.u1[inside], p.u2[inside])


def test_01_jets_match_oracle(verdict):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        f = random_field(rng)
        p = random_points(rng, 1)
        worst = max(worst, float(np.max(np.abs(eval_jet(f, p).derivatives() - fd_richardson(f, p, 1e-2)))))
    elapsed = time.perf_counter() - start
    verdict(1, "jet vs oracle", worst <= 1e-4 and elapsed < 10, f"max error {worst:.2e} in {elapsed:.2f} s")


def test_02_curvature_oracles(verdict):
    rng = np.random.default_rng(1)
    p = random_points(rng, 100, 1.5)
    k_sphere = np.max(np.abs(gauss_curvature(Metric2.conformal(SPHERE), p) - 4.0))
    q = Point2(rng.uniform(-2, 2, 100), rng.uniform(0.2, 3, 100))
    k_hyp = np.max(np.abs(gauss_curvature(Metric2.conformal("ln(y)"), q) + 1.0))
    # closed form for a = exp(-2 phi) delta: K = exp(2 phi) Laplacian(phi)
    phi = random_conformal_factor(rng)
    J = eval_jet(phi, p, 2)
    closed = np.exp(2 * J.value) * (J.partial(2, 0) + J.partial(0, 2))
    k_rand = np.max(np.abs(gauss_curvature(Metric2.conformal(phi), p) - closed))
    worst = max(k_sphere, k_hyp, k_rand)
    verdict(
        2,
        "curvature oracles",
        worst <= 1e-8,
        f"sphere {k_sphere:.1e}, half-plane {k_hyp:.1e}, random conformal {k_rand:.1e}",
    )


def test_03_statement1_and_ricci_identities(verdict):
    rng = np.random.default_rng(3)
    s1 = rs = rv = 0.0
    for _ in range(50):
        a = random_metric(rng)
        c = assemble_connection(a, random_difference(rng))
        p = random_points(rng, 50)
        s1 = max(s1, statement1_residual(c, p))
        r_scalar, r_vector = ricci_identity_residuals(
            c, random_field(rng), VectorField2(random_field(rng), random_field(rng)), p
        )
        rs, rv = max(rs, r_scalar), max(rv, r_vector)
    worst = max(s1, rs, rv)
    verdict(3, "identities", worst <= 1e-8, f"statement1 {s1:.1e}, Ricci scalar {rs:.1e}, vector {rv:.1e}")


def test_04_flatness_criterion(verdict):
    a = Metric2.conformal(SPHERE)
    t = grad_a(SPHERE, a)
    p = GridSpec.square(1.0, 21).points()
    curv = np.max(np.abs(curvature_of(vectorial_connection(a, t), a, p).R))
    defect = np.max(np.abs(flatness_defect(a, t, p)))
    bent = t + VectorField2("0.1*sin(x)", "0.1*x*y")
    bent_curv = np.max(np.abs(curvature_of(vectorial_connection(a, bent), a, p).R))
    ok = curv <= 1e-7 and defect <= 1e-8 and bent_curv >= 1e-2
    verdict(
        4,
        "flatness criterion",
        ok,
        f"max curvature {curv:.1e}, K - div t {defect:.1e}, perturbed curvature {bent_curv:.2f}",
    )


def test_05_poisson_construction(verdict):
    a = Metric2.conformal(SPHERE)
    errs, hs = [], []
    start = time.perf_counter()
    for n in (33, 65, 129, 257):
        g = GridSpec.square(0.8, n)
        if n == 257:
            start = time.perf_counter()
        errs.append(solve_flat_potential(a, g, SPHERE).max_error(SPHERE))
        hs.append(g.hx)
    elapsed = time.perf_counter() - start
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    bound = all(e <= 5 * h**2 for e, h in zip(errs, hs))
    ok = bound and np.all(np.abs(orders - 2.0) <= 0.2) and elapsed < 60
    verdict(
        5,
        "Poisson construction",
        ok,
        f"errors/h^2 {[round(e / h**2, 3) for e, h in zip(errs, hs)]}, "
        f"orders {np.round(orders, 3).tolist()}, 257^2 in {elapsed:.2f} s",
    )


def test_06_half_plane(verdict):
    a = Metric2.conformal("ln(y)")
    t = VectorField2(0, "y")
    rng = np.random.default_rng(6)
    p = Point2(rng.uniform(-2, 2, 100), rng.uniform(0.2, 3, 100))
    K = gauss_curvature(a, p)
    norm = a.inner(p, t.at(p), t.at(p))
    parallel = np.max(np.abs(covariant_derivative(vectorial_connection(a, t), t, p)))
    worst = max(np.max(np.abs(K + norm)), np.max(np.abs(K + 1)))
    verdict(6, "half-plane", worst <= 1e-8, f"|K + |t|^2| and |K + 1| <= {worst:.1e}, |nabla t| {parallel:.1e}")


def test_07_canonical_transformations(verdict):
    rng = np.random.default_rng(7)
    worst_R = worst_scalar = worst_L = 0.0
    for _ in range(20):
        a = random_metric(rng)
        c = vectorial_connection(a, gradient(random_field(rng, 2)))
        sigma = random_field(rng, 2)
        p = random_points(rng, 10)
        a2, c2 = canonical_transform(a, c, sigma, check_at=p)
        k1, k2 = curvature_of(c, a, p), curvature_of(c2, a2, p)
        worst_R = max(worst_R, np.max(np.abs(k2.R - k1.R)), np.max(np.abs(k2.ricci - k1.ricci)))
        worst_scalar = max(worst_scalar, np.max(np.abs(k2.scalar - np.exp(2 * sigma(p)) * k1.scalar)))
        worst_L = max(worst_L, np.max(np.abs(torsion_of(c2, p).L - torsion_of(c, p).L)))
    ok = worst_R <= 1e-9 and worst_scalar <= 1e-9 and worst_L <= 1e-9
    verdict(
        7,
        "canonical transformations",
        ok,
        f"curvature/Ricci {worst_R:.1e}, scalar {worst_scalar:.1e}, traceless torsion {worst_L:.1e}",
    )


def test_08_class1_solution(verdict):
    c = Couplings(1.0, 1.0, 4.0)
    state = class1_build(ClassISolution(Branch.LOWER, 1.0, 1.0, 0.0, HolomorphicField.identity(), c))
    p = disk_points(2.0, 41)
    el = el_residual(state, c, p).max
    R = field_invariants(state, p).R
    r_dev = np.max(np.abs(np.abs(R) - 4.0))
    rep = action_eval(state, c, GridSpec.disk(1.0, 32), plane_radius=8.0)
    gb_rel = abs(rep.gauss_bonnet / (4 * np.pi) - 1)
    area_rel = abs(rep.area / np.pi - 1)
    ok = el <= 1e-8 and r_dev <= 1e-8 and gb_rel <= 1e-2 and area_rel <= 1e-2
    verdict(
        8,
        "class (i) solution",
        ok,
        f"EL {el:.1e}, ||R| - 4| {r_dev:.1e}, GB/4pi - 1 {gb_rel:.1e}, F/pi - 1 {area_rel:.1e}, "
        f"chi (Gauss-Bonnet) {rep.chi_gauss_bonnet:.4f}, chi (R0 F / 4 pi) {rep.chi_r0:.4f}",
    )


def test_09_class2_solution(verdict):
    sol = ClassIISolution(Couplings.from_Lambda(2.0), 0.0, 1.0, HolomorphicField.identity())
    grid = GridSpec.square(0.5, 21)
    state = class2_build(sol, grid)
    p = grid.points()
    ode = state.table.ode_residual()
    el = el_residual(state, sol.couplings, p).max
    inv = field_invariants(state, p)
    h = state.aux(p)
    hp = state.table.slope(2 * p.u1)
    r_err = np.max(np.abs(inv.R + h))
    t_err = np.max(np.abs(inv.torsion_sq - 4 * hp * np.exp(-h)))
    m_err = np.max(np.abs(metric_from_torsion_check(sol, state, p)))
    ok = ode <= 1e-10 and el <= 1e-6 and r_err <= 1e-6 and t_err <= 1e-6 and m_err <= 1e-8
    verdict(
        9,
        "class (ii) solution",
        ok,
        f"ODE {ode:.1e}, EL {el:.1e}, R + h {r_err:.1e}, T^2 {t_err:.1e}, metric from torsion {m_err:.1e}",
    )


def test_10_geodesics(verdict):
    z0, v0 = 0.3 - 0.2j, 0.6 + 0.8j
    steps, dtau = 10_000, 1e-3
    conf = conformal_geodesic(SPHERE, z0, v0, steps, dtau)
    drift = np.ptp(conf.first_integral)
    lc = levi_civita(Metric2.conformal(SPHERE))
    init = GeodesicState(0.0, (z0.real, z0.imag), (v0.real, v0.imag))
    comp = integrate_geodesic(lc, init, steps, dtau)
    agree = np.max(np.abs(conf.position - comp.position))
    ref = integrate_geodesic(lc, GeodesicState(0.0, (0.1, 0.2), (1.0, 0.5)), 400, 1 / 400).position[-1]
    err = [
        np.max(np.abs(integrate_geodesic(lc, GeodesicState(0.0, (0.1, 0.2), (1.0, 0.5)), n, 1 / n).position[-1] - ref))
        for n in (20, 40)
    ]
    ratio = err[0] / err[1]
    ok = drift <= 1e-6 and agree <= 1e-6 and 16 * 0.7 <= ratio <= 16 * 1.3 and not conf.truncated
    verdict(
        10,
        "geodesics",
        ok,
        f"first-integral drift {drift:.1e}, integrators differ {agree:.1e}, halving ratio {ratio:.2f}",
    )


def test_11_lattice(verdict):
    strength = burgers(0, 1, d=1.42).strength
    counts = stone_wales_counts(6, 6, 6, 6)
    rng = np.random.default_rng(11)
    invariant = all(
        stone_wales_counts(*stone_wales_change(*q)) == stone_wales_counts(*q)
        for q in (tuple(int(x) for x in rng.integers(4, 50, 4)) for _ in range(1000))
    )
    ok = round(strength, 2) == 2.46 and counts == (16, 19) and invariant
    verdict(
        11,
        "lattice",
        ok,
        f"strength {strength:.2f} A ({strength:.6f}), counts {counts}, SW invariance on 1000 inputs {invariant}",
    )


def test_12_volume_compatibility(verdict):
    rng = np.random.default_rng(12)
    winners = []
    for _ in range(20):
        a = random_metric(rng)
        p = random_points(rng, 10)
        phi = random_field(rng, 2)
        # a constant draw has no torsion and both signs pass trivially
        while np.max(np.abs(gradient(phi).at(p))) < 1e-3:
            phi = random_field(rng, 2)
        c = vectorial_connection(a, gradient(phi))
        passing = [
            s for s in (1, -1) if volume_compatibility(c, a, AreaForm2(a, s * phi), p).compatible_defect <= 1e-9
        ]
        winners.append(passing)
    unique = all(len(w) == 1 for w in winners)
    same = unique and len({w[0] for w in winners}) == 1
    verdict(12, "volume compatibility", same, f"winning sign {winners[0]} on all 20 instances: {same}")
