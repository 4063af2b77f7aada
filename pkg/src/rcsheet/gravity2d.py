"""Quadratic curvature-torsion field theory in the conformal gauge.

Units and charts
----------------
States live on the dimensionless chart ``x = u^1 / l0``, ``y = u^2 / l0``.
The physical metric in that chart is ``l0^2 exp(-2 phi) delta`` and the
zweibein is ``e_a = (exp(phi) / l0) d_a``.  Scalars such as ``R`` and the
torsion norm are physical (``cm^-2`` and ``cm^-1``); tensor components are
chart components.

Sign conventions
----------------
* ``R`` denotes the scalar entering the field equations,
  ``R = -a^{ab} R_{ab} = 2 e^{ab} d_a omega_b`` with ``e^{12} = 1 / sqrt(a)``.
  For a torsion-free state ``R = -2K`` with ``K`` the Gauss curvature.
* ``t`` is the trace ``t_a = T_{ak}^k``.  A state with potential ``f`` has
  ``t = df`` and spin-connection vector ``omega^a = e^{ab} d_b (phi + f)``.
* The torsion scalar ``T`` of the Lagrangian is ``|t|_a``; the invariants
  of the explicit solutions use the full contraction
  ``T_{abk} T^{abk} = 2 |t|_a^2``.
"""

import enum
from dataclasses import dataclass
from itertools import product

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate

from .dislocation import Frame2, aitken, vectorial_connection
from .errors import ConstraintError, DomainError
from .fieldcalc import (
    HolomorphicField,
    Point2,
    apply,
    as_field,
    as_point,
    constant,
    exp,
    ln,
)
from .geometry import (
    EPS,
    R2,
    Metric2,
    VectorField2,
    curvature_jets,
    gauss_curvature,
    ricci_jets,
    scalar_jets,
    torsion_trace_jets,
    values,
)

__all__ = [
    "ActionReport",
    "Branch",
    "ClassISolution",
    "ClassIISolution",
    "ConformalGaugeState",
    "ConstantCaseInvariants",
    "Couplings",
    "ELResidual",
    "action_eval",
    "class1_build",
    "class2_build",
    "constant_case_invariants",
    "curvature_factorization_residual",
    "el_residual",
    "field_invariants",
    "katanaev_scalar",
    "lagrangian",
    "metric_from_torsion_check",
    "theorem3_residual",
    "zweibein_residual",
]


# ---------------------------------------------------------------------------
# couplings and Lagrangian


@dataclass(frozen=True)
class Couplings:
    """Coupling constants ``sigma > 0``, ``mu > 0``, ``lam >= 0``."""

    sigma: float
    mu: float
    lam: float

    def __post_init__(self):
        if not (self.sigma > 0 and self.mu > 0 and self.lam >= 0):
            raise ValueError("couplings need sigma > 0, mu > 0 and lam >= 0")

    @classmethod
    def from_Lambda(cls, Lambda, sigma=1.0, mu=1.0):
        """Couplings with the given dimensionless constant."""
        return cls(sigma, mu, Lambda * mu * mu / (4.0 * sigma))

    @property
    def l0(self):
        """Characteristic length ``sqrt(2 sigma / mu)``."""
        return float(np.sqrt(2.0 * self.sigma / self.mu))

    @property
    def Lambda(self):
        """Dimensionless constant ``4 lam sigma / mu^2``."""
        return 4.0 * self.lam * self.sigma / self.mu**2

    def scaled(self, c):
        return Couplings(c * self.sigma, c * self.mu, c * self.lam)


def lagrangian(R, T, c):
    """``(sigma R^2 + 2 mu T^2) / 4 + lam``."""
    return 0.25 * (c.sigma * np.asarray(R) ** 2 + 2.0 * c.mu * np.asarray(T) ** 2) + c.lam


# ---------------------------------------------------------------------------
# conformal gauge state


class ConformalGaugeState:
    """Metric ``l0^2 exp(-2 phi) delta`` with torsion potential ``f``.

    Parameters
    ----------
    phi, f : ScalarField2, str or number
    couplings : Couplings
    aux : ScalarField2, optional
        Column reported next to ``phi`` (``f`` for class (i), ``h`` for class (ii)).
    """

    def __init__(self, phi, f, couplings, aux=None, label="state", w=None, table=None):
        self.phi = as_field(phi)
        self.f = as_field(f)
        self.couplings = couplings
        self.aux = self.f if aux is None else as_field(aux)
        self.label = label
        self.w = w
        self.table = table
        self.domain = self.phi.domain

    def __repr__(self):
        return f"ConformalGaugeState({self.label})"

    @property
    def l0(self):
        return self.couplings.l0

    def conformal_factor(self):
        """Field ``exp(-2 phi)`` (dimensionless metric factor)."""
        return exp(-2.0 * self.phi)

    def metric(self):
        return Metric2.conformal(self.phi, scale=self.l0**2)

    def torsion_covector(self):
        """Covector parametrizing the vectorial connection (``-df``)."""
        return VectorField2(-self.f.diff(0), -self.f.diff(1), covariant=True)

    def connection(self):
        return vectorial_connection(self.metric(), self.torsion_covector())

    def zweibein(self):
        """Frame ``e_a^k = exp(phi) / l0 delta_a^k``."""
        s = exp(self.phi) / self.l0
        return Frame2((s, 0.0), (0.0, s))

    def spin_vector(self, p, order=0):
        """Jets of ``omega^a = e^{ab} d_b (phi + f)``."""
        p = as_point(p)
        m = self.metric().jets(p, order)
        psi = (self.phi + self.f).jet(p, order + 1)
        rs = m.sqrt_det.reciprocal()
        dpsi = [psi.d(0), psi.d(1)]
        return [rs * dpsi[1], -(rs * dpsi[0])]

    def sample(self, grid):
        """Grid points and nodal values of ``phi`` and ``aux``."""
        p = grid.points()
        return p, self.phi(p), self.aux(p)


def zweibein_residual(state, p):
    """Residuals of the zweibein relations at ``p``.

    Returns ``(connection_res, metric_res)``: the maxima of
    ``d_b e^a_c - Gamma^k_{bc} e^a_k - omega_b eps^{ab} e^b_c`` and of
    ``a_{cd} - e^a_c e^a_d``.
    """
    p = as_point(p)
    e = state.zweibein()
    _, Co, _ = e.jets(p, 1)
    G = values(state.connection().jets(p, 0))
    m = state.metric().jets(p, 0)
    g = values(m.g)
    om_up = values(state.spin_vector(p, 0))
    om = np.einsum("bk...,k...->b...", g, om_up)
    Cv = values([[x.truncate(0) for x in r] for r in Co])  # [a, k] = e^a_k
    dC = np.stack([values([[Co[a][c].d(b) for c in R2] for a in R2]) for b in R2])  # [b, a, c]
    eps = EPS.reshape((2, 2) + (1,) * (Cv.ndim - 2))
    res = (
        dC
        - np.einsum("kbc...,ak...->bac...", G, Cv)
        - np.einsum("b...,ax...,xc...->bac...", om, eps, Cv)
    )
    metric_res = g - np.einsum("ac...,ad...->cd...", Cv, Cv)
    return float(np.max(np.abs(res))), float(np.max(np.abs(metric_res)))


# ---------------------------------------------------------------------------
# invariants and Euler-Lagrange residuals


@dataclass
class FieldInvariants:
    """Pointwise ``R``, ``t_a``, ``|t|_a^2`` and the full torsion square."""

    R: np.ndarray
    t: np.ndarray
    t_norm_sq: np.ndarray
    torsion_sq: np.ndarray


def _geometry_jets(a, c, p):
    p = as_point(p)
    m = a.jets(p, 3)
    G = c.jets(p, 2)
    Rj = curvature_jets(G)
    R = -1.0 * scalar_jets(ricci_jets(Rj), m)  # order 1
    t = torsion_trace_jets(G)  # order 2
    return m, G, R, t


def field_invariants(state_or_pair, p):
    a, c = _pair(state_or_pair)
    p = as_point(p)
    m = a.jets(p, 0)
    G = c.jets(p, 1)
    R = -1.0 * scalar_jets(ricci_jets(curvature_jets(G)), a.jets(p, 1))
    t = values([x.truncate(0) for x in torsion_trace_jets(G)])
    inv = values(m.inv)
    tt = np.einsum("ab...,a...,b...->...", inv, t, t)
    return FieldInvariants(R.value, t, tt, 2.0 * tt)


def _pair(obj):
    if isinstance(obj, ConformalGaugeState):
        return obj.metric(), obj.connection()
    a, c = obj
    return a, c


@dataclass
class ELResidual:
    """Field-equation residuals ``res1[a]`` and ``res2[a, b]`` at sample points."""

    res1: np.ndarray
    res2: np.ndarray

    @property
    def max(self):
        return float(max(np.max(np.abs(self.res1)), np.max(np.abs(self.res2))))

    @property
    def trace(self):
        return self.res2[0, 0] + self.res2[1, 1]


def el_residual(state, c, p):
    """Residuals of the field equations.

    ``res1_a = sigma d_a R + mu t_a`` and
    ``res2_{ab} = mu nabla_a t_b + a_{ab} (sigma R^2 + 2 mu |t|^2 - 4 lam) / 4``
    with ``nabla`` the connection of the state.

    Parameters
    ----------
    state : ConformalGaugeState or (Metric2, Connection2)
    c : Couplings
    """
    a, conn = _pair(state)
    m, G, R, t = _geometry_jets(a, conn, p)
    t1 = [x.truncate(1) for x in t]
    res1 = np.stack([c.sigma * R.d(k).value + c.mu * t1[k].truncate(0).value for k in R2])
    G0 = [[[x.truncate(0) for x in r] for r in s] for s in G]
    t0 = [x.truncate(0) for x in t]
    nt = [[t1[b].d(al) - sum((G0[k][al][b] * t0[k] for k in R2), start=0.0 * t0[0]) for b in R2] for al in R2]
    inv = values([[x.truncate(0) for x in r] for r in m.inv])
    tv = values(t0)
    tt = np.einsum("ab...,a...,b...->...", inv, tv, tv)
    g = values([[x.truncate(0) for x in r] for r in m.g])
    src = 0.25 * (c.sigma * R.value**2 + 2.0 * c.mu * tt - 4.0 * c.lam)
    res2 = c.mu * values(nt) + g * src
    return ELResidual(res1, res2)


def katanaev_scalar(state, p):
    """``R`` and ``t_a`` from the zweibein and spin connection alone.

    ``R = 2 e^{ab} d_a omega_b`` and ``t_a = 2 e_c^k tau^c_{ak} - omega^k e_{ak}``
    with ``tau^c_{ak} = d_[a e^c_k]``.
    """
    p = as_point(p)
    m = state.metric().jets(p, 2)
    om_up = state.spin_vector(p, 1)
    g1 = [[x.truncate(1) for x in r] for r in m.g]
    om = [g1[b][0] * om_up[0] + g1[b][1] * om_up[1] for b in R2]
    rs = m.sqrt_det.truncate(0).reciprocal()
    R = 2.0 * rs * (om[1].d(0) - om[0].d(1))
    e = state.zweibein()
    E, Co, _ = e.jets(p, 1)
    t = []
    for al in R2:
        acc = 0.0
        for cc, k in product(R2, R2):
            tau = 0.5 * (Co[cc][k].d(al) - Co[cc][al].d(k))
            acc = acc + 2.0 * E[cc][k].value * tau.value
        sq = m.sqrt_det.value
        # e_{ak} = sqrt(a) eps_{ak}
        acc = acc - sum(om_up[k].value * sq * EPS[al, k] for k in R2)
        t.append(acc)
    return R.value, np.stack(t)


def curvature_factorization_residual(state, p):
    """Max of ``|a_{ak} R_{msb}^k + (R / 2) e_{ab} e_{ms}|`` at ``p``.

    ``R`` is the field-equation scalar, so the curvature of a metric
    connection factorizes as ``-(R / 2) e_{ab} e_{ms}``.
    """
    p = as_point(p)
    a, c = _pair(state)
    m = a.jets(p, 1)
    Rj = curvature_jets(c.jets(p, 1))
    Rt = values(Rj)  # [m, s, b, k]
    g = values([[x.truncate(0) for x in r] for r in m.g])
    sq = m.sqrt_det.truncate(0).value
    low = np.einsum("ak...,msbk...->abms...", g, Rt)
    R = -scalar_jets(ricci_jets(Rj), m).value
    e = EPS.reshape((2, 2) + (1,) * np.ndim(sq)) * sq
    model = -0.5 * R * np.einsum("ab...,ms...->abms...", e, e)
    return float(np.max(np.abs(low - model)))


# ---------------------------------------------------------------------------
# reduced equations


def _complex_derivs(F):
    """``F_z``, ``F_zz`` and ``F_{z zbar}`` from an order-2 jet."""
    _, fx, fy, fxx, fxy, fyy = F.derivatives()[:6]
    fz = 0.5 * (fx - 1j * fy)
    fzz = 0.25 * (fxx - fyy - 2j * fxy)
    fzzb = 0.25 * (fxx + fyy)
    return fz, fzz, fzzb


def theorem3_residual(phi, f, Lambda, p):
    """Residuals of the reduced conformal-gauge equations at ``p``.

    Returns ``(r1, r2, |r3|, |r4|)`` with

    * ``r1 = 4 f_{z zbar} + (f^2 - Lambda) exp(-2 phi)``,
    * ``r2 = 4 phi_{z zbar} - (f^2 + f - Lambda) exp(-2 phi)``,
    * ``r3 = f_zz + f_z^2 + 2 phi_z f_z`` and ``r4`` its conjugate equation.
    """
    p = as_point(p)
    P = as_field(phi).jet(p, 2)
    F = as_field(f).jet(p, 2)
    pz, _, pzzb = _complex_derivs(P)
    fz, fzz, fzzb = _complex_derivs(F)
    f0 = F.value
    e2 = np.exp(-2.0 * P.value)
    r1 = 4.0 * fzzb + (f0**2 - Lambda) * e2
    r2 = 4.0 * pzzb - (f0**2 + f0 - Lambda) * e2
    r3 = fzz + fz**2 + 2.0 * pz * fz
    r4 = np.conj(fzz) + np.conj(fz) ** 2 + 2.0 * np.conj(pz) * np.conj(fz)
    return r1, r2, np.abs(r3), np.abs(r4)


# ---------------------------------------------------------------------------
# class (i)


class Branch(enum.Enum):
    """Sign branch of the constant-torsion-potential solutions.

    ``UPPER``: ``a d - |b|^2 = -sqrt(Lambda) / 4`` and ``f = -sqrt(Lambda)``.
    ``LOWER``: ``a d - |b|^2 = +sqrt(Lambda) / 4`` and ``f = +sqrt(Lambda)``.
    """

    UPPER = "upper"
    LOWER = "lower"

    @property
    def sign(self):
        return -1.0 if self is Branch.UPPER else 1.0


@dataclass
class ClassISolution:
    """Parameters of a solution with constant torsion potential."""

    branch: Branch
    a_c: float
    d_c: float
    b_c: complex
    w: HolomorphicField
    couplings: Couplings

    def __post_init__(self):
        self.branch = Branch(self.branch)
        self.b_c = complex(self.b_c)

    @property
    def f_value(self):
        return self.branch.sign * np.sqrt(self.couplings.Lambda)

    def constraint_residual(self):
        target = self.branch.sign * np.sqrt(self.couplings.Lambda) / 4.0
        return self.a_c * self.d_c - abs(self.b_c) ** 2 - target


def class1_build(sol, grid=None, tol=1e-12):
    """Conformal-gauge state of a class-(i) solution.

    ``exp(-2 phi) = |w'|^2 / D^2`` with
    ``D = a |w|^2 + b w + conj(b) conj(w) + d`` and constant ``f``.

    Raises
    ------
    ConstraintError
        If the branch constraint fails or ``D <= 0`` on ``grid``.
    """
    if abs(sol.constraint_residual()) > tol:
        raise ConstraintError(
            f"a d - |b|^2 = {sol.a_c * sol.d_c - abs(sol.b_c) ** 2} does not match the "
            f"{sol.branch.value} branch value {sol.branch.sign * np.sqrt(sol.couplings.Lambda) / 4}"
        )
    w = sol.w
    u, v = w.re, w.im
    br, bi = sol.b_c.real, sol.b_c.imag
    D = sol.a_c * (u * u + v * v) + 2.0 * (br * u - bi * v) + sol.d_c
    if grid is not None:
        if np.any(D(grid.points()) <= 0):
            raise ConstraintError("denominator must be positive on the domain")
    phi = ln(D) - 0.5 * ln(w.modulus_sq_derivative())
    f = constant(sol.f_value)
    return ConformalGaugeState(phi, f, sol.couplings, label=f"class-i/{sol.branch.value}", w=w)


# ---------------------------------------------------------------------------
# class (ii)


class ExpPoly:
    """Function ``sum_k p_k(h) exp(k h)`` of one variable with polynomial ``p_k``."""

    def __init__(self, terms):
        self.terms = {k: p if isinstance(p, Polynomial) else Polynomial(p) for k, p in terms.items()}

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        return sum(p(h) * np.exp(k * h) for k, p in self.terms.items())

    def dh(self):
        out = {}
        for k, p in self.terms.items():
            out[k] = _padd(out.get(k), p.deriv() + k * p)
        return ExpPoly(out)

    def __mul__(self, other):
        out = {}
        for (k1, p1), (k2, p2) in product(self.terms.items(), other.terms.items()):
            out[k1 + k2] = _padd(out.get(k1 + k2), p1 * p2)
        return ExpPoly(out)


def _padd(a, b):
    return b if a is None else a + b


class HTable:
    """Solution of ``h' = G(h)`` tabulated on knots with exact ODE-derived derivatives.

    ``G(h) = -((h^2 - 2h + 2 - Lambda) exp(h) + A) / 4``.  Values between
    knots use cubic Hermite interpolation with slopes ``G(h_i)``; higher
    derivatives follow from the ODE as functions of the interpolated value.
    """

    def __init__(self, Lambda, A, h0, xi_min, xi_max, step=1e-3, xi0=0.0):
        self.Lambda, self.A, self.h0, self.step, self.xi0 = Lambda, A, h0, step, xi0
        G = ExpPoly({1: [2.0 - Lambda, -2.0, 1.0], 0: [A]}) * ExpPoly({0: [-0.25]})
        self.G = G
        D = [ExpPoly({0: [0.0, 1.0]})]
        lo = xi0 - step * np.ceil(max(xi0 - xi_min, 0.0) / step + 4)
        hi = xi0 + step * np.ceil(max(xi_max - xi0, 0.0) / step + 4)
        n_lo = int(round((xi0 - lo) / step))
        n_hi = int(round((hi - xi0) / step))
        up = self._rk4(h0, step, n_hi)
        down = self._rk4(h0, -step, n_lo)
        self.knots = xi0 + step * np.arange(-n_lo, n_hi + 1)
        self.values = np.concatenate([down[::-1], up[1:]])
        slopes = G(self.values)
        if np.any(slopes <= 0):
            bad = self.knots[np.argmax(slopes <= 0)]
            raise ConstraintError(f"h' <= 0 near xi = {bad:.6g}; the solution leaves its class")
        self.slopes = slopes
        self.h = HFunction(self, D[0], G)
        self.log_slope = HFunction(self, lambda h: np.log(G(h)), G.dh(), name="ln h'")

    def _rk4(self, h, dx, n):
        G = self.G
        out = np.empty(n + 1)
        out[0] = h
        for i in range(n):
            if not G(h) > 0:
                raise ConstraintError(f"h' <= 0 encountered at h = {h:.6g}; the solution leaves its class")
            k1 = G(h)
            k2 = G(h + 0.5 * dx * k1)
            k3 = G(h + 0.5 * dx * k2)
            k4 = G(h + dx * k3)
            h = h + dx * (k1 + 2 * k2 + 2 * k3 + k4) / 6
            if not np.isfinite(h):
                raise ConstraintError("ODE integration diverged")
            out[i + 1] = h
        return out

    def interpolate(self, xi):
        xi = np.asarray(xi, dtype=float)
        if np.any(xi < self.knots[0]) or np.any(xi > self.knots[-1]):
            raise DomainError("argument outside the tabulated range of h")
        i = np.clip(((xi - self.knots[0]) / self.step).astype(int), 0, len(self.knots) - 2)
        s = (xi - self.knots[i]) / self.step
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return (
            h00 * self.values[i]
            + h10 * self.step * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * self.step * self.slopes[i + 1]
        )

    def slope(self, xi):
        """``h'(xi) = G(h(xi))``."""
        return self.G(self.interpolate(xi))

    def ode_residual(self):
        """Max of ``|4 h' + (h^2 - 2h + 2 - Lambda) e^h + A|`` at interior knots.

        ``h'`` comes from sixth-order central differences of the knot values.
        """
        c = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
        v = self.values
        n = len(v)
        d = sum(c[j] * v[j : n - 6 + j] for j in range(7)) / self.step
        h = v[3:-3]
        res = 4 * d + (h * h - 2 * h + 2 - self.Lambda) * np.exp(h) + self.A
        return float(np.max(np.abs(res)))


class HFunction:
    """A quantity ``Q(h(xi))`` as a univariate field function of ``xi``.

    ``value(h)`` gives ``Q`` and ``first`` (an :class:`ExpPoly`) gives
    ``dQ/dxi`` as a function of ``h``; higher derivatives follow from
    ``d/dxi = G(h) d/dh``, so no quotient by the small slope ``h'`` appears.
    """

    def __init__(self, table, value, first, name="h"):
        self.table, self.value, self.first, self.name = table, value, first, name
        self._chain = [first]
        self._derivative = None

    def _d(self, n):
        while len(self._chain) < n:
            self._chain.append(self._chain[-1].dh() * self.table.G)
        return self._chain[n - 1]

    def derivatives(self, xi):
        h = self.table.interpolate(xi)
        return [self.value(h)] + [self._d(n)(h) for n in (1, 2, 3)]

    @property
    def derivative(self):
        if self._derivative is None:
            self._derivative = HFunction(self.table, self._d(1), self._d(2), self.name + "'")
        return self._derivative

    def __repr__(self):
        return f"HFunction({self.name})"


@dataclass
class ClassIISolution:
    """Parameters of a solution with non-constant torsion potential ``f = h(w + conj w)``."""

    couplings: Couplings
    A: float
    h0: float
    w: HolomorphicField
    xi0: float = 0.0
    step: float = 1e-3

    def initial_slope(self):
        """``h'(xi0)`` from the ODE."""
        L = self.couplings.Lambda
        h = self.h0
        return -((h * h - 2 * h + 2 - L) * np.exp(h) + self.A) / 4.0


def class2_build(sol, grid, margin=0.5):
    """Conformal-gauge state of a class-(ii) solution on ``grid``.

    ``h`` is tabulated over the range of ``xi = w + conj(w) = 2 Re w`` on the
    grid (plus ``margin``); ``f = h(xi)`` and
    ``exp(-2 phi) = h'(xi) |w'|^2 exp(h(xi))``.

    Raises
    ------
    ConstraintError
        If ``h' <= 0`` at the start or anywhere on the needed range.
    """
    if not sol.initial_slope() > 0:
        raise ConstraintError(f"h'(xi0) = {sol.initial_slope():.6g} <= 0; class (ii) needs h' > 0")
    w = sol.w
    xi = 2.0 * w.re
    vals = xi(grid.points())
    table = HTable(
        sol.couplings.Lambda,
        sol.A,
        sol.h0,
        min(float(vals.min()), sol.xi0) - margin,
        max(float(vals.max()), sol.xi0) + margin,
        sol.step,
        sol.xi0,
    )
    h = apply(table.h, xi)
    log_hp = apply(table.log_slope, xi)
    phi = -0.5 * (log_hp + h + ln(w.modulus_sq_derivative()))
    return ConformalGaugeState(phi, h, sol.couplings, aux=h, label="class-ii", w=w, table=table)


def metric_from_torsion_check(sol, state, p):
    """``exp(-2 phi) - (T l0 / (2 sqrt 2))^2 exp(2h) |w'|^2`` with ``T^2 = 2 |t|^2``."""
    p = as_point(p)
    inv = field_invariants(state, p)
    T2 = inv.torsion_sq
    h = state.aux(p)
    wp2 = sol.w.modulus_sq_derivative()(p)
    lhs = np.exp(-2.0 * state.phi(p))
    return lhs - T2 * state.l0**2 / 8.0 * np.exp(2.0 * h) * wp2


# ---------------------------------------------------------------------------
# constant-curvature case


@dataclass
class ConstantCaseInvariants:
    """Both signs of ``R0`` and the consistency of its two closed forms."""

    R0_plus: float
    R0_minus: float
    Lambda: float
    residual: float


def constant_case_invariants(c):
    r0 = c.mu / c.sigma * np.sqrt(c.Lambda)
    res = abs((c.mu / c.sigma) ** 2 * c.Lambda - 4.0 * c.lam / c.sigma)
    return ConstantCaseInvariants(r0, -r0, c.Lambda, res)


# ---------------------------------------------------------------------------
# action


@dataclass
class ActionReport:
    """Integrated quantities of a state.

    ``area`` and ``action`` use the dimensionless area element
    ``exp(-2 phi) dx dy``; ``gauss_bonnet`` is the scale-free ``int K dF``.
    ``chi_gauss_bonnet = gauss_bonnet / 2 pi`` and
    ``chi_r0 = |mean R| area / 4 pi`` are the two Euler-characteristic
    readings.  ``error`` holds extrapolation error estimates when the
    plane was integrated.
    """

    action: float
    area: float
    mean_R: float
    gauss_bonnet: float
    chi_gauss_bonnet: float
    chi_r0: float
    r0_area: float
    error: dict = None


def _state_integrands(state, c, X, Y):
    p = Point2(X, Y)
    inv = field_invariants(state, p)
    ef = np.exp(-2.0 * state.phi(p))
    L = lagrangian(inv.R, np.sqrt(inv.t_norm_sq), c)
    # Gauss curvature of the dimensionless metric
    K = gauss_curvature(Metric2.conformal(state.phi), p)
    return np.stack([L * ef, ef, inv.R * ef, K * ef])


def action_eval(state, c, grid, plane_radius=None):
    """Integrate the Lagrangian, area, curvature and Gauss-Bonnet density.

    Parameters
    ----------
    state : ConformalGaugeState
    c : Couplings
    grid : GridSpec
        Rectangle (Simpson) or disk (Gauss panels in r, trapezoid in theta).
    plane_radius : float, optional
        Integrate over disks of radius ``R, 2R, 4R`` and extrapolate.
    """
    fn = lambda X, Y: _state_integrands(state, c, X, Y)  # noqa: E731

    def disk(radius, n):
        xg, wg = np.polynomial.legendre.leggauss(8)
        panels = max(1, n // 8)
        edges = np.linspace(0.0, radius, panels + 1)
        mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
        r = (mid[:, None] + half[:, None] * xg[None]).ravel()
        wr = (half[:, None] * wg[None]).ravel()
        m = max(8, 2 * n)
        th = 2 * np.pi * np.arange(m) / m
        Rm, Tm = np.meshgrid(r, th, indexing="ij")
        F = fn(Rm * np.cos(Tm), Rm * np.sin(Tm))
        return np.sum(wr * r * F.sum(axis=2), axis=1) * 2 * np.pi / m

    err = None
    if plane_radius is not None:
        radii = (plane_radius, 2 * plane_radius, 4 * plane_radius)
        seq = [disk(R, 4 * grid.nx) for R in radii]
        out, errs = [], []
        for k in range(4):
            v, e = aitken([s[k] for s in seq])
            out.append(v)
            errs.append(e)
        I = np.array(out)
        err = dict(zip(("action", "area", "R", "gauss_bonnet"), errs))
    elif grid.disk_radius is not None:
        I = disk(grid.disk_radius, grid.nx)
    else:
        xs, ys = grid.axes()
        X, Y = np.meshgrid(xs, ys)
        F = fn(X, Y)
        I = integrate.simpson(integrate.simpson(F, x=xs, axis=2), x=ys, axis=1)
    S, F_, Rint, GB = (float(v) for v in I)
    if not F_ > 0:
        raise ValueError("area must be positive")
    mean_R = Rint / F_
    r0_area = abs(mean_R) * F_
    return ActionReport(
        action=S,
        area=F_,
        mean_R=mean_R,
        gauss_bonnet=GB,
        chi_gauss_bonnet=GB / (2 * np.pi),
        chi_r0=r0_area / (4 * np.pi),
        r0_area=r0_area,
        error=err,
    )
