"""Pointwise tensor calculus on a two-dimensional chart.

Index conventions
-----------------
* Connection coefficients ``gamma[k][a][b]`` are ``Gamma^k_{ab}`` with the
  differentiation slot first: ``nabla_{d_a} d_b = Gamma^k_{ab} d_k``, so
  ``nabla_a u^k = d_a u^k + Gamma^k_{ab} u^b``.
* Torsion ``S[a, b, k] = S_{ab}^k = Gamma^k_{[ab]}`` and ``T = 2 S``.
* Curvature ``R[k, a, b, n] = R_{kab}^n`` with
  ``R_{kab}^n = d_k Gamma^n_{ab} - d_a Gamma^n_{kb}
  + Gamma^r_{ab} Gamma^n_{kr} - Gamma^r_{kb} Gamma^n_{ar}``,
  i.e. ``R(d_k, d_a) d_b = R_{kab}^n d_n``.  Ricci ``R_{ab} = R_{kab}^k``,
  scalar ``R = a^{ab} R_{ab}``.
* Lowered three-index tensors keep the raised index in the last slot,
  e.g. ``Q_{ans} = a_{sk} Q_{an}^k``.

Pointwise results are numpy arrays whose leading axes are tensor indices
and whose trailing axes are the batch shape of the evaluation point.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import ConstraintError, SingularMetricError
from .fieldcalc import PLANE, Jet, as_field, as_point, constant, exp, sqrt
from .fieldcalc.fields import intersect

DET_MIN = 1e-14
R2 = (0, 1)
EPS = np.array([[0.0, 1.0], [-1.0, 0.0]])


def values(obj):
    """Stack the values of a nested list of jets into an array."""
    if isinstance(obj, Jet):
        return obj.value
    return np.stack([values(o) for o in obj])


def _zero(order, shape):
    return Jet.constant(np.zeros(shape), order)


# ---------------------------------------------------------------------------
# metric


@dataclass
class MetricJets:
    """Jets of ``a_{ab}``, ``a^{ab}``, ``det a`` and ``sqrt(det a)`` at a point."""

    g: list
    inv: list
    det: Jet
    sqrt_det: Jet

    @property
    def order(self):
        return self.det.order


class Metric2:
    """Symmetric positive-definite metric ``a_{ab}`` given by three component fields.

    Parameters
    ----------
    a11, a12, a22 : ScalarField2, str or number
    """

    def __init__(self, a11, a12, a22, domain=PLANE):
        self.a11 = as_field(a11, domain)
        self.a12 = as_field(a12, domain)
        self.a22 = as_field(a22, domain)
        self.domain = intersect(intersect(self.a11.domain, self.a12.domain), self.a22.domain)

    def __repr__(self):
        return f"Metric2({self.a11}, {self.a12}, {self.a22})"

    @classmethod
    def euclidean(cls, domain=PLANE):
        return cls(1.0, 0.0, 1.0, domain)

    @classmethod
    def conformal(cls, phi, scale=1.0, domain=PLANE):
        """``a = scale * exp(-2 phi) delta``."""
        phi = as_field(phi, domain)
        c = scale * exp(-2.0 * phi)
        return cls(c, constant(0.0, phi.domain), c)

    def component(self, a, b):
        return (self.a11, self.a12, self.a22)[a + b]

    def scaled(self, factor):
        """Metric ``factor * a`` for a scalar field or number ``factor``."""
        factor = as_field(factor)
        return Metric2(factor * self.a11, factor * self.a12, factor * self.a22)

    # derived fields (closed form, keep full jet order) ---------------------
    def det_field(self):
        return self.a11 * self.a22 - self.a12 * self.a12

    def inverse_fields(self):
        d = self.det_field()
        return self.a22 / d, -self.a12 / d, self.a11 / d

    def sqrt_det_field(self):
        return sqrt(self.det_field())

    # evaluation -----------------------------------------------------------
    def jets(self, p, order=3):
        p = as_point(p)
        a11, a12, a22 = (f.jet(p, order) for f in (self.a11, self.a12, self.a22))
        det = a11 * a22 - a12 * a12
        if np.any(det.value <= DET_MIN) or np.any(a11.value <= 0):
            raise SingularMetricError("metric is not positive definite at the evaluation point")
        rdet = det.reciprocal()
        inv = [[a22 * rdet, -a12 * rdet], [-a12 * rdet, a11 * rdet]]
        return MetricJets([[a11, a12], [a12, a22]], inv, det, det.sqrt())

    def at(self, p):
        m = self.jets(p, 0)
        return values(m.g)

    def inner(self, p, u, v):
        """``(u, v)_a`` for contravariant component arrays ``u``, ``v``."""
        g = self.at(p)
        return np.einsum("ab...,a...,b...->...", g, np.asarray(u), np.asarray(v))


def christoffel_jets(m):
    """Levi-Civita coefficients from metric jets (order drops by one)."""
    k = m.order - 1
    dg = [[[m.g[a][b].d(c) for c in R2] for b in R2] for a in R2]  # dg[a][b][c] = d_c a_ab
    gl = [[[None] * 2 for _ in R2] for _ in R2]  # Gamma_{s ab}, first index lowered
    for s, a, b in product(R2, R2, R2):
        gl[s][a][b] = 0.5 * (dg[b][s][a] + dg[a][s][b] - dg[a][b][s])
    inv = [[m.inv[i][j].truncate(k) for j in R2] for i in R2]
    return [
        [[inv[kk][0] * gl[0][a][b] + inv[kk][1] * gl[1][a][b] for b in R2] for a in R2]
        for kk in R2
    ]


# ---------------------------------------------------------------------------
# vector fields and area forms


class VectorField2:
    """Vector or covector field with explicit index position.

    Parameters
    ----------
    v1, v2 : ScalarField2, str or number
        Components.
    covariant : bool
        ``True`` for a covector ``v_a du^a``, ``False`` for ``v^a d_a``.
    """

    def __init__(self, v1, v2, covariant=False, domain=PLANE):
        self.v1 = as_field(v1, domain)
        self.v2 = as_field(v2, domain)
        self.covariant = bool(covariant)
        self.domain = intersect(self.v1.domain, self.v2.domain)

    def __repr__(self):
        kind = "covector" if self.covariant else "vector"
        return f"VectorField2({self.v1}, {self.v2}, {kind})"

    @property
    def components(self):
        return (self.v1, self.v2)

    def jets(self, p, order=3):
        p = as_point(p)
        return [self.v1.jet(p, order), self.v2.jet(p, order)]

    def at(self, p):
        return values(self.jets(p, 0))

    def __neg__(self):
        return VectorField2(-self.v1, -self.v2, self.covariant)

    def __add__(self, other):
        if other.covariant != self.covariant:
            raise ValueError("cannot add a vector to a covector")
        return VectorField2(self.v1 + other.v1, self.v2 + other.v2, self.covariant)

    def scaled(self, factor):
        factor = as_field(factor)
        return VectorField2(factor * self.v1, factor * self.v2, self.covariant)

    def lowered(self, a):
        if self.covariant:
            return self
        return VectorField2(
            a.a11 * self.v1 + a.a12 * self.v2, a.a12 * self.v1 + a.a22 * self.v2, True
        )

    def raised(self, a):
        if not self.covariant:
            return self
        i11, i12, i22 = a.inverse_fields()
        return VectorField2(i11 * self.v1 + i12 * self.v2, i12 * self.v1 + i22 * self.v2, False)


def gradient(f):
    """Covector ``d f``."""
    f = as_field(f)
    return VectorField2(f.diff(0), f.diff(1), covariant=True)


def grad_a(f, a):
    """Metric gradient ``a^{ab} d_b f`` (contravariant)."""
    return gradient(f).raised(a)


@dataclass(frozen=True)
class Bivector2:
    """Infinitesimal oriented area element ``df^{12}`` with orientation sign ``eps``."""

    df12: float
    eps: int = 1

    def __post_init__(self):
        if self.eps not in (1, -1):
            raise ValueError("orientation sign must be +1 or -1")


class AreaForm2:
    """Area form ``omega = exp(psi) omega_a`` relative to the metric area element."""

    def __init__(self, metric, psi=0.0):
        self.metric = metric
        self.psi = as_field(psi)

    def density_jets(self, p, order=3):
        """Jet of ``rho = exp(psi) sqrt(det a)`` (``omega = rho du^1 du^2``)."""
        m = self.metric.jets(p, order)
        return self.psi.jet(p, order).exp() * m.sqrt_det


# ---------------------------------------------------------------------------
# connections


def _tensor3_jets(Q, p, order):
    """Jets of a three-index field given as nested fields or a callable."""
    if callable(Q):
        return Q(p, order)
    return [[[as_field(Q[k][a][b]).jet(p, order) for b in R2] for a in R2] for k in R2]


class Connection2:
    """Affine connection on a chart.

    Parameters
    ----------
    kind : str
        One of ``levi-civita``, ``levi-civita+difference``, ``vectorial``,
        ``teleparallel``, ``raw``.
    gamma : callable
        ``gamma(p, order)`` returning nested jets ``[k][a][b]``.
    max_order : int
        Highest jet order ``gamma`` can deliver.
    """

    KINDS = ("levi-civita", "levi-civita+difference", "vectorial", "teleparallel", "raw")

    def __init__(self, kind, gamma, max_order=2, domain=PLANE, metric=None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown connection kind {kind!r}")
        self.kind = kind
        self._gamma = gamma
        self.max_order = max_order
        self.domain = domain
        self.metric = metric

    def __repr__(self):
        return f"Connection2(kind={self.kind!r})"

    @classmethod
    def from_components(cls, comps, kind="raw", domain=PLANE):
        """Connection from eight component fields ``comps[k][a][b]``."""
        fields = [[[as_field(comps[k][a][b], domain) for b in R2] for a in R2] for k in R2]
        dom = domain
        for k, a, b in product(R2, R2, R2):
            dom = intersect(dom, fields[k][a][b].domain)
        return cls(kind, lambda p, order: _tensor3_jets(fields, p, order), 3, dom)

    @classmethod
    def zero(cls, domain=PLANE):
        return cls.from_components([[[0.0] * 2] * 2] * 2, domain=domain)

    def jets(self, p, order=None):
        order = self.max_order if order is None else order
        if order > self.max_order:
            raise ValueError(f"connection jets available to order {self.max_order} only")
        return self._gamma(as_point(p), order)

    def at(self, p):
        """``Gamma^k_{ab}`` values, shape ``(2, 2, 2, *batch)``."""
        return values(self.jets(p, 0))

    def derivatives(self, p):
        """``d_m Gamma^k_{ab}``, shape ``(2, 2, 2, 2, *batch)`` indexed ``[m, k, a, b]``."""
        g = self.jets(p, 1)
        return np.stack([values([[[g[k][a][b].d(m) for b in R2] for a in R2] for k in R2]) for m in R2])

    def plus(self, Q, kind=None):
        """Connection ``Gamma + Q`` for a difference tensor ``Q[k][a][b]``."""
        base = self

        def gamma(p, order):
            g = base.jets(p, order)
            q = _tensor3_jets(Q, p, order)
            return [[[g[k][a][b] + q[k][a][b] for b in R2] for a in R2] for k in R2]

        return Connection2(kind or self.kind, gamma, self.max_order, self.domain, self.metric)


def levi_civita(a):
    """Levi-Civita connection of ``a``; jets available to order 2.

    ``levi_civita(a).at(p)`` and ``.derivatives(p)`` give the coefficient
    values and their first derivatives at ``p``.
    """

    def gamma(p, order):
        return christoffel_jets(a.jets(p, order + 1))

    return Connection2("levi-civita", gamma, 2, a.domain, a)


def assemble_connection(a, Q):
    """``Gamma = Gamma~(a) + Q`` for difference tensor fields ``Q[k][a][b] = Q_{ab}^k``."""
    return levi_civita(a).plus(Q, kind="levi-civita+difference")


# ---------------------------------------------------------------------------
# torsion


@dataclass
class Torsion2:
    """Torsion at a point.

    Attributes
    ----------
    S : ndarray ``[a, b, k]``
        ``S_{ab}^k``.
    T : ndarray
        ``2 S``.
    t : ndarray ``[a]``
        Trace ``t_a = T_{ak}^k``.
    t_vol : ndarray ``[s]``
        Trace ``T_{as}^a = -t_s``, the one entering volume compatibility.
    L : ndarray
        Traceless part ``T_{ab}^k - (t_a delta^k_b - t_b delta^k_a)``.
    """

    S: np.ndarray
    T: np.ndarray
    t: np.ndarray
    t_vol: np.ndarray
    L: np.ndarray


def torsion_jets(G):
    """Nested jets ``S[a][b][k]`` from connection jets."""
    return [[[0.5 * (G[k][a][b] - G[k][b][a]) for k in R2] for b in R2] for a in R2]


def torsion_trace_jets(G):
    """Jets of ``t_a = T_{ak}^k = Gamma^k_{ak} - Gamma^k_{ka}``."""
    return [sum((G[k][a][k] - G[k][k][a] for k in R2), start=0.0 * G[0][0][0]) for a in R2]


def _torsion_from_S(S):
    T = 2.0 * S
    t = np.einsum("akk...->a...", T)
    t_vol = np.einsum("asa...->s...", T)
    d = np.eye(2).reshape((2, 2) + (1,) * (T.ndim - 3))
    L = T - (t[:, None, None] * d[None, :, :] - t[None, :, None] * d[:, None, :])
    return Torsion2(S, T, t, t_vol, L)


def torsion_of(c, p):
    """Torsion decomposition of ``c`` at ``p``."""
    G = c.at(p)
    S = 0.5 * (G - np.swapaxes(G, 1, 2))  # [k, a, b]
    return _torsion_from_S(np.moveaxis(S, 0, 2))


def vectorial_torsion_residual(tor):
    """Max deviation of ``T`` from the reassembly ``L + (t_a d^k_b - t_b d^k_a)``."""
    d = np.eye(2).reshape((2, 2) + (1,) * (tor.T.ndim - 3))
    re = tor.L + tor.t[:, None, None] * d[None] - tor.t[None, :, None] * d[:, None]
    return float(np.max(np.abs(re - tor.T)))


def pentagon_closure(S, df):
    """Closing vector ``delta b^k = eps S_{ab}^k df^{ab} = eps T_{12}^k df12``.

    ``S`` may be a :class:`Torsion2` or an ``S[a, b, k]`` array.
    """
    S = S.S if isinstance(S, Torsion2) else np.asarray(S)
    return df.eps * 2.0 * S[0, 1] * df.df12


# ---------------------------------------------------------------------------
# non-metricity


@dataclass
class NonmetricityDecomp:
    """Non-metricity and difference-tensor decomposition at a point.

    ``W[a, b, k] = W_{ab}^k``; ``P, V, K, Q, difference`` are lowered
    ``[a, n, s]``; ``w[a]`` is the Weyl covector.  ``Q = K + V`` while
    ``difference`` is ``a_{sk}(Gamma - Gamma~)^k_{an}`` computed directly.
    """

    W: np.ndarray
    W_low: np.ndarray
    P: np.ndarray
    w: np.ndarray
    V: np.ndarray
    K: np.ndarray
    Q: np.ndarray
    difference: np.ndarray


def _metric_values(a, p):
    m = a.jets(p, 1)
    g = values(m.g)
    inv = values(m.inv)
    dg = np.stack([values([[m.g[i][j].d(c) for j in R2] for i in R2]) for c in R2])  # [c, i, j]
    return g, inv, dg


def nonmetricity_of(c, a, p):
    """Decompose ``Gamma`` relative to the metric ``a`` at ``p``."""
    p = as_point(p)
    g, inv, dg = _metric_values(a, p)
    G = c.at(p)
    # nabla_a g_{bs} = d_a g_bs - G^k_ab g_ks - G^k_as g_bk
    nab = dg - np.einsum("kab...,ks...->abs...", G, g) - np.einsum("kas...,bk...->abs...", G, g)
    W_low = -nab
    W = np.einsum("ks...,abs...->abk...", inv, W_low)
    w = -0.5 * np.einsum("ns...,ans...->a...", inv, W_low)
    P = W_low + g[None] * w[:, None, None]
    V = 0.5 * (W_low + np.einsum("nsa...->ans...", W_low) - np.einsum("san...->ans...", W_low))
    S = 0.5 * (G - np.swapaxes(G, 1, 2))  # [k, a, n]
    S_low = np.einsum("sk...,kan...->ans...", g, S)
    K = S_low - np.einsum("asn...->ans...", S_low) - np.einsum("nsa...->ans...", S_low)
    Gt = values(christoffel_jets(a.jets(p, 1)))
    diff = np.einsum("sk...,kan...->ans...", g, G - Gt)
    return NonmetricityDecomp(W, W_low, P, w, V, K, K + V, diff)


# ---------------------------------------------------------------------------
# curvature


def curvature_jets(G):
    """Nested jets ``R[k][a][b][n]`` from connection jets (order drops by one)."""
    order = G[0][0][0].order - 1
    g0 = [[[G[k][a][b].truncate(order) for b in R2] for a in R2] for k in R2]
    zero = 0.0 * g0[0][0][0]
    R = [[[[zero for _ in R2] for _ in R2] for _ in R2] for _ in R2]
    for b, n in product(R2, R2):
        val = G[n][1][b].d(0) - G[n][0][b].d(1)
        for r in R2:
            val = val + g0[r][1][b] * g0[n][0][r] - g0[r][0][b] * g0[n][1][r]
        R[0][1][b][n] = val
        R[1][0][b][n] = -val
    return R


def ricci_jets(R):
    return [[sum((R[k][a][b][k] for k in R2), start=0.0 * R[0][0][0][0]) for b in R2] for a in R2]


def scalar_jets(ric, m):
    """``a^{ab} R_{ab}`` with metric jets ``m``."""
    order = ric[0][0].order
    out = 0.0 * ric[0][0]
    for a, b in product(R2, R2):
        out = out + m.inv[a][b].truncate(order) * ric[a][b]
    return out


@dataclass
class Curvature2:
    """Curvature at a point.

    ``R[k, a, b, n] = R_{kab}^n``; ``ricci[a, b] = R_{kab}^k``; ``scalar`` is
    ``a^{ab} R_{ab}``; ``gauss`` is the Gauss curvature of the metric.  The
    last two are ``None`` when no metric was supplied.
    """

    R: np.ndarray
    ricci: np.ndarray
    scalar: object = None
    gauss: object = None


def curvature_of(c, a, p):
    """Curvature of ``c`` at ``p``; ``a`` (optional) supplies the scalar and K."""
    p = as_point(p)
    R = curvature_jets(c.jets(p, 1))
    ric = ricci_jets(R)
    scalar = gauss = None
    if a is not None:
        m = a.jets(p, 2)
        scalar = scalar_jets(ric, m).value
        gauss = gauss_curvature(a, p)
    return Curvature2(values(R), values(ric), scalar, gauss)


def gauss_curvature(a, p):
    """Sectional curvature ``a_{1n} R~_{122}^n / det a`` of the Levi-Civita connection."""
    p = as_point(p)
    m = a.jets(p, 2)
    R = curvature_jets(christoffel_jets(m))
    num = m.g[0][0].value * R[0][1][1][0].value + m.g[0][1].value * R[0][1][1][1].value
    return num / m.det.value


def holonomy_defect(c, v, df, p):
    """Change ``dv^k = -1/2 R_{sml}^k v^l df^{sm} = -R_{12l}^k v^l df12``.

    This is the first-order change of ``v`` after parallel transport around
    a small loop traversed first along ``d_1`` and then along ``d_2``
    (counter-clockwise for positive ``df12``).
    """
    R = curvature_of(c, None, p).R
    v = np.asarray(v, dtype=float)
    return -np.einsum("lk...,l...->k...", R[0, 1], v) * df.df12


# ---------------------------------------------------------------------------
# covariant derivatives and identities


def covariant_derivative_jets(G, u):
    """Jets ``D[a][k] = nabla_a u^k`` for vector jets ``u``."""
    order = min(G[0][0][0].order, u[0].order - 1)
    return [
        [
            u[k].d(a).truncate(order)
            + sum(
                (G[k][a][l].truncate(order) * u[l].truncate(order) for l in R2),
                start=0.0 * G[0][0][0].truncate(order),
            )
            for k in R2
        ]
        for a in R2
    ]


def covariant_derivative(c, u, p):
    """``nabla_a u^k`` (array ``[a, k]``) for a contravariant field ``u``."""
    p = as_point(p)
    return values(covariant_derivative_jets(c.jets(p, 0), u.jets(p, 1)))


def covector_derivative_jets(G, t):
    """Jets ``D[a][b] = nabla_a t_b = d_a t_b - Gamma^k_{ab} t_k``."""
    order = min(G[0][0][0].order, t[0].order - 1)
    return [
        [
            t[b].d(a).truncate(order)
            - sum(
                (G[k][a][b].truncate(order) * t[k].truncate(order) for k in R2),
                start=0.0 * G[0][0][0].truncate(order),
            )
            for b in R2
        ]
        for a in R2
    ]


def statement1_residual(c, p):
    """Max of ``|R_{aml}^k - (delta^k_a R_{ml} - delta^k_m R_{al})|`` at ``p``."""
    cur = curvature_of(c, None, p)
    R, ric = cur.R, cur.ricci
    d = np.eye(2).reshape((2, 2) + (1,) * (R.ndim - 4))
    rhs = np.einsum("ka...,ml...->amlk...", d, ric) - np.einsum("km...,al...->amlk...", d, ric)
    return float(np.max(np.abs(R - rhs)))


def ricci_identity_residuals(c, f, u, p):
    """Residuals of the commutator identities for a scalar and a vector field.

    Returns ``(scalar_res, vector_res)``: the maxima of

    * ``(nabla_b nabla_a - nabla_a nabla_b) f - T_{ab}^l d_l f``;
    * ``(nabla_b nabla_a - nabla_a nabla_b) u^k - R_{bal}^k u^l - T_{ab}^l nabla_l u^k``.

    Second covariant derivatives are assembled from jets.
    """
    p = as_point(p)
    G = c.jets(p, 1)
    G0 = [[[G[k][a][b].truncate(0) for b in R2] for a in R2] for k in R2]
    f = as_field(f).jet(p, 2)
    df = [f.d(a) for a in R2]
    # nabla_b nabla_a f = d_b d_a f - Gamma^l_{ba} d_l f
    h = [[df[a].d(b) - sum(G0[l][b][a] * df[l].truncate(0) for l in R2) for a in R2] for b in R2]
    S = values(torsion_jets(G0))
    T = 2.0 * S
    dfv = values([d.truncate(0) for d in df])
    res_f = 0.0
    for a, b in product(R2, R2):
        lhs = h[b][a].value - h[a][b].value
        rhs = np.einsum("l...,l...->...", T[a, b], dfv)
        res_f = max(res_f, float(np.max(np.abs(lhs - rhs))))

    uj = u.jets(p, 2)
    D1 = covariant_derivative_jets(G, uj)  # order 1: D1[a][k] = nabla_a u^k
    # nabla_b (nabla_a u^k) = d_b D_a^k - Gamma^l_{ba} D_l^k + Gamma^k_{bl} D_a^l
    D0 = [[D1[a][k].truncate(0) for k in R2] for a in R2]
    DD = [
        [
            [
                D1[a][k].d(b)
                - sum(G0[l][b][a] * D0[l][k] for l in R2)
                + sum(G0[k][b][l] * D0[a][l] for l in R2)
                for k in R2
            ]
            for a in R2
        ]
        for b in R2
    ]
    R = values(curvature_jets(G))
    uv = values([x.truncate(0) for x in uj])
    Dv = values(D0)  # [a, k]
    res_u = 0.0
    for a, b, k in product(R2, R2, R2):
        lhs = DD[b][a][k].value - DD[a][b][k].value
        rhs = np.einsum("l...,l...->...", R[b, a, :, k], uv) + np.einsum(
            "l...,l...->...", T[a, b], Dv[:, k]
        )
        res_u = max(res_u, float(np.max(np.abs(lhs - rhs))))
    return res_f, res_u


def density_tensors(a, p):
    """``e_{ab} = sqrt(a) eps_{ab}`` and ``e^{ab} = eps^{ab} / sqrt(a)``."""
    m = a.jets(p, 0)
    s = m.sqrt_det.value
    eps = EPS.reshape((2, 2) + (1,) * np.ndim(s))
    return eps * s, eps / s


def density_identity_residuals(a, p):
    """Residuals of ``e^{as} e_{bs} = delta`` and ``e_{ab} e_{ls} = a_al a_bs - a_as a_bl``."""
    lo, up = density_tensors(a, p)
    g = a.at(p)
    d = np.eye(2).reshape((2, 2) + (1,) * (g.ndim - 2))
    r1 = np.einsum("as...,bs...->ab...", up, lo) - d
    lhs = np.einsum("ab...,ls...->abls...", lo, lo)
    rhs = np.einsum("al...,bs...->abls...", g, g) - np.einsum("as...,bl...->abls...", g, g)
    return float(np.max(np.abs(r1))), float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# divergence and volume forms


def div_omega(w, omega, p):
    """Divergence of a vector field with respect to an area form.

    With ``omega = rho du^1 ^ du^2`` the Lie derivative is
    ``L_w omega = d(i_w omega) = d_a(rho w^a) du^1 ^ du^2``, hence
    ``div_omega w = rho^{-1} d_a(rho w^a)``.
    """
    p = as_point(p)
    if w.covariant:
        w = w.raised(omega.metric)
    rho = omega.density_jets(p, 1)
    wj = w.jets(p, 1)
    flux = [rho * wj[a] for a in R2]
    return (flux[0].d(0) + flux[1].d(1)).value / rho.value


def div_a(w, a, p):
    return div_omega(w, AreaForm2(a), p)


@dataclass
class VolumeCompatibility:
    """Compatibility of an area form with a connection at a point.

    Attributes
    ----------
    residual : ndarray
        ``t_a + v_a - d_a psi`` with the traces ``t_s = T_{as}^a`` and
        ``v_s = V_{as}^a``.
    residual_alt : ndarray
        The same with the opposite trace ``T_{ak}^k``.
    lie_defect : ndarray
        Ground truth ``Gamma^a_{ab} - d_b ln rho``, the coefficient of
        ``w^b`` in ``nabla_a w^a - div_omega w``.
    """

    residual: np.ndarray
    residual_alt: np.ndarray
    lie_defect: np.ndarray

    @property
    def compatible_defect(self):
        return float(np.max(np.abs(self.lie_defect)))

    @property
    def formula_error(self):
        return float(np.max(np.abs(self.residual - self.lie_defect)))

    @property
    def formula_error_alt(self):
        return float(np.max(np.abs(self.residual_alt - self.lie_defect)))


def volume_compatibility(c, a, omega, p):
    p = as_point(p)
    tor = torsion_of(c, p)
    nm = nonmetricity_of(c, a, p)
    _, inv, dg = _metric_values(a, p)
    v = np.einsum("ak...,ask...->s...", inv, nm.V)
    dpsi = values([d for d in (omega.psi.jet(p, 1).d(0), omega.psi.jet(p, 1).d(1))])
    G = c.at(p)
    trace_gamma = np.einsum("aab...->b...", G)
    dln_sqrt = 0.5 * np.einsum("mn...,bmn...->b...", inv, dg)
    lie = trace_gamma - dln_sqrt - dpsi
    return VolumeCompatibility(tor.t_vol + v - dpsi, tor.t + v - dpsi, lie)


# ---------------------------------------------------------------------------
# canonical transformations


def canonical_transform(a, c, sigma, check_at=None, tol=1e-8):
    """Conformal rescaling ``a -> exp(-2 sigma) a`` with the compatible connection shift.

    ``Gamma^k_{ab} -> Gamma^k_{ab} - d_a sigma delta^k_b`` keeps the connection
    metric for the new metric, leaves the curvature tensor unchanged and
    shifts the torsion trace ``T_{ak}^k`` by ``-d sigma``.

    Parameters
    ----------
    check_at : Point2, optional
        Points where metric compatibility of ``c`` with ``a`` is verified
        before transforming.
    """
    sigma = as_field(sigma)
    if check_at is not None:
        nm = nonmetricity_of(c, a, check_at)
        if np.max(np.abs(nm.W_low)) > tol:
            raise ConstraintError("connection is not metric; canonical transform needs nabla a = 0")
    a_new = a.scaled(exp(-2.0 * sigma))

    def shift(p, order):
        s = sigma.jet(p, order + 1)
        ds = [s.d(i) for i in R2]
        z = 0.0 * ds[0]
        return [[[-ds[al] if k == b else z for b in R2] for al in R2] for k in R2]

    return a_new, Connection2(c.kind, _sum_gamma(c, shift), c.max_order, c.domain, a_new)


def _sum_gamma(c, extra):
    def gamma(p, order):
        g = c.jets(p, order)
        q = extra(p, order)
        return [[[g[k][a][b] + q[k][a][b] for b in R2] for a in R2] for k in R2]

    return gamma


def weyl_cartan_connection(a, w):
    """Torsion-free connection with ``nabla_a a_{ns} = w_a a_{ns}``.

    ``Gamma = Gamma~ - (w_a delta^k_n + w_n delta^k_a - a_{an} w^k) / 2``.
    """
    w = w if w.covariant else w.lowered(a)
    wu = w.raised(a)

    def Q(p, order):
        m = a.jets(p, order)
        lo = w.jets(p, order)
        up = wu.jets(p, order)
        z = 0.0 * lo[0]
        out = [[[None] * 2 for _ in R2] for _ in R2]
        for k, al, n in product(R2, R2, R2):
            val = m.g[al][n] * up[k] - (lo[al] if k == n else z) - (lo[n] if k == al else z)
            out[k][al][n] = 0.5 * val
        return out

    c = levi_civita(a).plus(Q, kind="levi-civita+difference")
    return c
