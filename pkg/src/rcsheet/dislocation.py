"""Dislocation geometry: vectorial torsion, flatness, frames and Burgers fields.

Vectorial-torsion convention
----------------------------
A metric connection with vectorial torsion is parametrized here by the
covector ``t`` entering volume compatibility,

    Gamma^k_{ab} = Gamma~^k_{ab} - a_{ab} t^k + t_b delta^k_a,

equivalently ``nabla_v u = nabla^a_v u - (u, v)_a t + (t, u)_a v``.  Its
torsion is ``T_{ab}^k = t_b delta^k_a - t_a delta^k_b``, so
``T_{as}^a = t_s`` while ``T_{ak}^k = -t_a``.  With this parametrization
the connection is flat exactly when ``K = div_a t`` and the area form
``exp(phi) omega_a`` is compatible with the gradient torsion ``t = d phi``.
"""

import warnings
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy import integrate, sparse
from scipy.sparse import linalg as spla

from .errors import (
    ConstraintError,
    ConvergenceError,
    DegenerateFrameError,
    DomainError,
)
from .fieldcalc import PLANE, GridSpec, Point2, as_field, as_point, cos, exp, sin
from .fieldcalc.fields import intersect
from .geometry import (
    EPS,
    R2,
    AreaForm2,
    Connection2,
    Metric2,
    VectorField2,
    christoffel_jets,
    covariant_derivative_jets,
    curvature_jets,
    div_a,
    gauss_curvature,
    grad_a,
    values,
)

__all__ = [
    "CountResult",
    "DislocationField",
    "FlatPotential",
    "Frame2",
    "LineCongruence",
    "TeleparallelReport",
    "VectorField2",
    "aitken",
    "alignment_angle",
    "anholonomy",
    "anholonomy_jets",
    "burgers_from_frame",
    "closed_teleparallelism_check",
    "dislocation_count",
    "flat_curvature_rhs",
    "flatness_defect",
    "frame_torsion",
    "grad_a",
    "isothermal_residual",
    "jacobi_residual",
    "line_congruence",
    "line_direction",
    "rotate_frame",
    "self_balance_residual",
    "solve_flat_potential",
    "teleparallel_connection",
    "vectorial_connection",
]


# ---------------------------------------------------------------------------
# vectorial torsion


def _contra_jets(t, a, p, order):
    """Contravariant and covariant jets of ``t`` at ``p``."""
    m = a.jets(p, order)
    tj = t.jets(p, order)
    if t.covariant:
        low = tj
        up = [m.inv[k][0] * low[0] + m.inv[k][1] * low[1] for k in R2]
    else:
        up = tj
        low = [m.g[k][0] * up[0] + m.g[k][1] * up[1] for k in R2]
    return m, up, low


def vectorial_connection(a, t):
    """Metric connection of ``a`` with vectorial torsion determined by ``t``.

    Parameters
    ----------
    a : Metric2
    t : VectorField2
        Covariant or contravariant; raised or lowered with ``a``.

    Returns
    -------
    Connection2
        Jets available to order 2.
    """

    def gamma(p, order):
        m, up, low = _contra_jets(t, a, p, order + 1)
        G = christoffel_jets(m)
        up = [u.truncate(order) for u in up]
        low = [u.truncate(order) for u in low]
        g = [[m.g[i][j].truncate(order) for j in R2] for i in R2]
        out = [[[None] * 2 for _ in R2] for _ in R2]
        for k, al, b in product(R2, R2, R2):
            val = G[k][al][b] - g[al][b] * up[k]
            if k == al:
                val = val + low[b]
            out[k][al][b] = val
        return out

    return Connection2("vectorial", gamma, 2, intersect(a.domain, t.domain), a)


def flat_curvature_rhs(a, t, u, v, w, p, tol=1e-8):
    """Curvature of the Levi-Civita connection predicted from a flat vectorial connection.

    For a flat vectorial connection ``nabla`` with covector ``t`` the
    Levi-Civita curvature acts as

        R^a(u, v) w = (v, w)_a nabla_u t - (u, w)_a nabla_v t
                      + (nabla_v t - |t|^2 v, w)_a u - (nabla_u t - |t|^2 u, w)_a v.

    Parameters
    ----------
    u, v, w : array_like
        Contravariant vectors at ``p``.

    Returns
    -------
    rhs : ndarray
        The right-hand side above.
    applicable : bool
        Whether the vectorial connection is flat at ``p`` within ``tol``.
    """
    p = as_point(p)
    c = vectorial_connection(a, t)
    G = c.jets(p, 1)
    m, up, _ = _contra_jets(t, a, p, 1)
    D = values(covariant_derivative_jets([[[x.truncate(0) for x in r] for r in s] for s in G], up))
    R = values(curvature_jets(G))
    applicable = bool(np.max(np.abs(R)) <= tol)
    g = values(m.g)
    tv = values([x.truncate(0) for x in up])
    tt = np.einsum("ab...,a...,b...->...", g, tv, tv)
    u, v, w = (np.asarray(x, dtype=float) for x in (u, v, w))

    def ip(x, y):
        return np.einsum("ab...,a...,b...->...", g, x, y)

    def nab(x):  # nabla_x t
        return np.einsum("a...,ak...->k...", x, D)

    nu, nv = nab(u), nab(v)
    rhs = ip(v, w) * nu - ip(u, w) * nv + ip(nv - tt * v, w) * u - ip(nu - tt * u, w) * v
    return rhs, applicable


def flatness_defect(a, t, p):
    """``K - div_a t`` at ``p``; zero exactly where the vectorial connection is flat."""
    return gauss_curvature(a, p) - div_a(t, a, p)


# ---------------------------------------------------------------------------
# Poisson construction


@dataclass
class FlatPotential:
    """Discrete solution of ``Delta_a phi = K`` on a rectangular grid.

    Attributes
    ----------
    grid : GridSpec
    phi : ndarray, shape (ny, nx)
        Nodal values, ``y`` slow.
    residual : float
        Relative residual of the linear solve.
    iterations : int
    method : str
    """

    grid: GridSpec
    phi: np.ndarray
    residual: float
    iterations: int
    method: str
    metric: Metric2 = field(repr=False, default=None)

    def max_error(self, exact):
        """Sup-norm difference to a reference field or nodal array."""
        ref = self._nodal(exact)
        return float(np.max(np.abs(self.phi - ref)))

    def _nodal(self, f):
        if isinstance(f, np.ndarray):
            return f
        X, Y = self.grid.mesh()
        return as_field(f)((X, Y))

    def flatness_defects(self, margin=2):
        """``K - Delta_a phi_h`` at interior nodes at least ``margin`` from the boundary.

        Derivatives of the discrete potential use fourth-order central
        differences; the metric enters through its exact jets.
        """
        margin = max(margin, 2)
        g = self.grid
        X, Y = g.mesh()
        hx, hy = g.hx, g.hy
        P = self.phi
        s = np.s_[margin:-margin, margin:-margin]

        def d1(F, axis, h):
            f = np.roll
            return (-f(F, -2, axis) + 8 * f(F, -1, axis) - 8 * f(F, 1, axis) + f(F, 2, axis)) / (12 * h)

        def d2(F, axis, h):
            f = np.roll
            return (
                -f(F, -2, axis) + 16 * f(F, -1, axis) - 30 * F + 16 * f(F, 1, axis) - f(F, 2, axis)
            ) / (12 * h * h)

        px, py = d1(P, 1, hx), d1(P, 0, hy)
        pxx, pyy = d2(P, 1, hx), d2(P, 0, hy)
        pxy = d1(d1(P, 1, hx), 0, hy)
        pts = Point2(X[s], Y[s])
        a = self.metric
        A = _flux_tensor_jets(a, pts)
        sq = a.jets(pts, 0).sqrt_det.value
        # d_a (A^{ab} d_b phi) = dA^{ab}/du^a d_b phi + A^{ab} d_a d_b phi
        grad = (px[s], py[s])
        hess = ((pxx[s], pxy[s]), (pxy[s], pyy[s]))
        lap = 0.0
        for i, j in product(R2, R2):
            lap = lap + A[i][j].d(i).value * grad[j] + A[i][j].truncate(0).value * hess[i][j]
        lap = lap / sq
        K = gauss_curvature(a, pts)
        return K - lap


def _flux_tensor_jets(a, p, order=1):
    m = a.jets(p, order)
    return [[m.sqrt_det * m.inv[i][j] for j in R2] for i in R2]


def solve_flat_potential(a, grid, boundary, rtol=1e-10, maxiter=10**6):
    """Solve ``Delta_a phi = K`` with Dirichlet data on a rectangular grid.

    The operator is discretized in conservative form
    ``d_a (sqrt(a) a^{ab} d_b phi) = sqrt(a) K`` with face-centred fluxes
    for the diagonal terms and centred differences for the mixed term
    (second order).  The system is solved by conjugate gradients when the
    assembled matrix is symmetric, otherwise by GMRES.

    Parameters
    ----------
    a : Metric2
    grid : GridSpec
        Rectangular (no disk mask), inside the metric's domain.
    boundary : ScalarField2, str, number or callable
        Dirichlet values; callables receive ``(X, Y)`` arrays.

    Returns
    -------
    FlatPotential

    Raises
    ------
    DomainError
        If the grid leaves the metric's domain or is masked.
    ConvergenceError
        If the relative residual target is not met.
    """
    if grid.disk_radius is not None:
        raise DomainError("the Poisson construction needs a rectangular grid")
    X, Y = grid.mesh()
    if not np.all(a.domain.contains(X, Y)):
        raise DomainError("grid extends outside the metric domain")
    ny, nx = X.shape
    hx, hy = grid.hx, grid.hy

    if callable(boundary) and not hasattr(boundary, "node"):
        bvals = np.asarray(boundary(X, Y), dtype=float) * np.ones_like(X)
    else:
        bvals = as_field(boundary)((X, Y)) * np.ones_like(X)

    def flux(x, y):
        A = _flux_tensor_jets(a, Point2(x, y), 0)
        return [[A[i][j].value for j in R2] for i in R2]

    # face fluxes for the diagonal terms
    Axe = flux(0.5 * (X[:, 1:] + X[:, :-1]), Y[:, 1:])[0][0]  # (ny, nx-1)
    Aye = flux(X[1:, :], 0.5 * (Y[1:, :] + Y[:-1, :]))[1][1]  # (ny-1, nx)
    An = flux(X, Y)
    A12 = An[0][1]
    mixed = bool(np.max(np.abs(A12)) > 0)
    sq = a.jets(Point2(X, Y), 0).sqrt_det.value
    K = gauss_curvature(a, Point2(X, Y))

    idx = -np.ones((ny, nx), dtype=np.int64)
    interior = np.zeros((ny, nx), dtype=bool)
    interior[1:-1, 1:-1] = True
    idx[interior] = np.arange(interior.sum())
    n = int(interior.sum())
    rows, cols, vals = [], [], []
    rhs = (sq * K)[interior].copy()
    J, I = np.nonzero(interior)
    k = idx[J, I]

    def couple(jj, ii, coef):
        nb = idx[jj, ii]
        inner = nb >= 0
        rows.append(k[inner])
        cols.append(nb[inner])
        vals.append(coef[inner])
        np.subtract.at(rhs, np.nonzero(~inner)[0], (coef * bvals[jj, ii])[~inner])

    ce = Axe[J, I] / hx**2
    cw = Axe[J, I - 1] / hx**2
    cn = Aye[J, I] / hy**2
    cs = Aye[J - 1, I] / hy**2
    rows.append(k)
    cols.append(k)
    vals.append(-(ce + cw + cn + cs))
    couple(J, I + 1, ce)
    couple(J, I - 1, cw)
    couple(J + 1, I, cn)
    couple(J - 1, I, cs)
    if mixed:
        # d_x(A12 d_y phi) + d_y(A12 d_x phi), centred at neighbours
        c = 1.0 / (4 * hx * hy)
        for di, dj, sgn in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
            coef = c * sgn * (A12[J, I + di] + A12[J + dj, I])
            couple(J + dj, I + di, coef)
    M = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    # the operator is negative definite; solve with -M
    M = -M
    b = -rhs
    sym = abs(M - M.T).max() <= 1e-12 * abs(M).max()
    count = [0]

    def cb(_):
        count[0] += 1

    if sym:
        sol, info = spla.cg(M, b, rtol=rtol, maxiter=maxiter, callback=cb)
        method = "cg"
    else:
        sol, info = spla.gmres(M, b, rtol=rtol, maxiter=maxiter, callback=cb, callback_type="legacy")
        method = "gmres"
    res = float(np.linalg.norm(M @ sol - b) / np.linalg.norm(b)) if np.linalg.norm(b) > 0 else 0.0
    if info != 0 or res > 10 * rtol:
        raise ConvergenceError(f"linear solve did not converge (info={info}, residual={res:.3e})")
    phi = bvals.copy()
    phi[interior] = sol
    return FlatPotential(grid, phi, res, count[0], method, a)


# ---------------------------------------------------------------------------
# frames


class Frame2:
    """Moving frame ``e_a = e_a^k d_k``.

    Parameters
    ----------
    e1, e2 : pairs of component fields
        ``e1 = (e_1^1, e_1^2)`` and ``e2 = (e_2^1, e_2^2)``.
    """

    def __init__(self, e1, e2, domain=PLANE):
        self.e = [[as_field(e1[0], domain), as_field(e1[1], domain)],
                  [as_field(e2[0], domain), as_field(e2[1], domain)]]
        dom = domain
        for a, k in product(R2, R2):
            dom = intersect(dom, self.e[a][k].domain)
        self.domain = dom

    def __repr__(self):
        return f"Frame2(e1=({self.e[0][0]}, {self.e[0][1]}), e2=({self.e[1][0]}, {self.e[1][1]}))"

    @classmethod
    def coordinate(cls):
        return cls((1.0, 0.0), (0.0, 1.0))

    @classmethod
    def conformal(cls, phi):
        """Orthonormal frame ``e_a = exp(phi) d_a`` of ``exp(-2 phi) delta``."""
        s = exp(as_field(phi))
        return cls((s, 0.0), (0.0, s))

    def vector(self, a):
        return VectorField2(self.e[a][0], self.e[a][1])

    def det_field(self):
        e = self.e
        return e[0][0] * e[1][1] - e[0][1] * e[1][0]

    def jets(self, p, order=3):
        """Frame jets ``E[a][k]``, coframe jets ``C[c][k]`` and determinant."""
        p = as_point(p)
        E = [[self.e[a][k].jet(p, order) for k in R2] for a in R2]
        det = E[0][0] * E[1][1] - E[0][1] * E[1][0]
        if np.any(np.abs(det.value) <= 1e-14):
            raise DegenerateFrameError("frame is degenerate at the evaluation point")
        r = det.reciprocal()
        # e^c_k: inverse of the matrix M[k][a] = e_a^k
        C = [[E[1][1] * r, -E[1][0] * r], [-E[0][1] * r, E[0][0] * r]]
        return E, C, det

    def at(self, p):
        E, C, det = self.jets(p, 0)
        return values(E), values(C), det.value

    def metric(self):
        """Metric ``a_{ab} = e^c_a e^c_b`` making the frame orthonormal."""
        e = self.e
        d = self.det_field()
        c = [[e[1][1] / d, -e[1][0] / d], [-e[0][1] / d, e[0][0] / d]]
        return Metric2(
            c[0][0] * c[0][0] + c[1][0] * c[1][0],
            c[0][0] * c[0][1] + c[1][0] * c[1][1],
            c[0][1] * c[0][1] + c[1][1] * c[1][1],
        )


def _bracket_jets(E, a, b):
    """Jets of ``[e_a, e_b]^k`` (order drops by one)."""
    order = E[0][0].order - 1
    return [
        sum(
            (
                E[a][l].truncate(order) * E[b][k].d(l) - E[b][l].truncate(order) * E[a][k].d(l)
                for l in R2
            ),
            start=0.0 * E[0][0].truncate(order),
        )
        for k in R2
    ]


def anholonomy_jets(e, p, order=2):
    """Jets ``C[a][b][c] = C_{ab}^c`` with ``[e_a, e_b] = C_{ab}^c e_c``."""
    E, Co, _ = e.jets(p, order + 1)
    Co = [[x.truncate(order) for x in r] for r in Co]
    out = [[[None] * 2 for _ in R2] for _ in R2]
    for a, b in product(R2, R2):
        br = _bracket_jets(E, a, b)
        for c in R2:
            out[a][b][c] = Co[c][0] * br[0] + Co[c][1] * br[1]
    return out


def anholonomy(e, p):
    """``C_{ab}^c`` values, array ``[a, b, c]``."""
    return values(anholonomy_jets(e, as_point(p), 0))


@dataclass
class DislocationField:
    """Local Burgers vector and density of a frame at sample points.

    Attributes
    ----------
    b : ndarray ``[k, ...]``
        Contravariant Burgers vector components.
    rho : ndarray
        Scalar density.
    eps : int
        Orientation sign.
    strength : ndarray
        Mean strength ``b_a = |b|_a`` (``nan`` where ``rho = 0``).
    t : ndarray ``[a, ...]``
        Covector with ``C_{ab}^c = t_b delta^c_a - t_a delta^c_b``.
    vectorial_residual : float
        Max of ``|rho b - (t_2 e_1 - t_1 e_2)|``.
    commutator_residual : float
        Max of ``|rho b - [e_1, e_2]|``.
    """

    b: np.ndarray
    rho: np.ndarray
    eps: int
    strength: np.ndarray
    t: np.ndarray
    vectorial_residual: float
    commutator_residual: float
    frame: Frame2 = None
    density: object = None


def burgers_from_frame(e, rho, eps=1, p=(0.0, 0.0), a=None):
    """Burgers field ``rho b = [e_1, e_2]`` at ``p``.

    Parameters
    ----------
    e : Frame2
    rho : ScalarField2, str or number
        Scalar dislocation density (user supplied, non-negative).
    eps : {1, -1}
        Orientation sign.
    a : Metric2, optional
        Metric for the strength; defaults to the frame metric.

    Raises
    ------
    ConstraintError
        If ``rho`` is negative, or zero where the commutator is not.
    """
    if eps not in (1, -1):
        raise ValueError("orientation sign must be +1 or -1")
    p = as_point(p)
    rho_f = as_field(rho)
    r = rho_f(p) * np.ones(p.shape)
    if np.any(r < 0):
        raise ConstraintError("dislocation density must be non-negative")
    E, _, _ = e.jets(p, 1)
    br = values(_bracket_jets(E, 0, 1))
    Cabc = anholonomy(e, p)
    zero = r == 0
    if np.any(zero & (np.max(np.abs(br), axis=0) > 1e-12)):
        raise ConstraintError("density vanishes where the frame commutator does not")
    with np.errstate(divide="ignore", invalid="ignore"):
        b = np.where(zero, 0.0, br / np.where(zero, 1.0, r))
    t = np.stack([-Cabc[0, 1, 1], Cabc[0, 1, 0]])
    Ev = values([[x.truncate(0) for x in row] for row in E])
    vec = t[1] * Ev[0] - t[0] * Ev[1]
    g = (a or e.metric()).at(p)
    norm = np.sqrt(np.einsum("ab...,a...,b...->...", g, b, b))
    strength = np.where(zero, np.nan, norm)
    return DislocationField(
        b=b,
        rho=r,
        eps=eps,
        strength=strength,
        t=t,
        vectorial_residual=float(np.max(np.abs(br - vec))),
        commutator_residual=float(np.max(np.abs(r * b - br))),
        frame=e,
        density=rho_f,
    )


# ---------------------------------------------------------------------------
# counting


@dataclass
class CountResult:
    """Quadrature of ``rho omega`` with an h-refinement error estimate."""

    value: float
    error: float
    radii: tuple = ()
    partial: tuple = ()


def _density_on(rho, omega, X, Y):
    p = Point2(X, Y)
    r = as_field(rho)(p) * np.ones_like(X)
    if np.any(r < 0):
        raise ConstraintError("dislocation density must be non-negative")
    return r * omega.density_jets(p, 0).value


def _rect_integral(fn, x0, x1, y0, y1, n):
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    X, Y = np.meshgrid(xs, ys)
    F = fn(X, Y)
    return integrate.simpson(integrate.simpson(F, x=xs, axis=1), x=ys)


def _disk_integral(fn, radius, cx, cy, n):
    """Gauss-Legendre panels in ``r`` times the periodic trapezoid rule in ``theta``."""
    panels = max(1, n // 8)
    xg, wg = np.polynomial.legendre.leggauss(8)
    edges = np.linspace(0.0, radius, panels + 1)
    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
    r = (mid[:, None] + half[:, None] * xg[None]).ravel()
    wr = (half[:, None] * wg[None]).ravel()
    m = max(8, 2 * n)
    th = 2 * np.pi * np.arange(m) / m
    R, T = np.meshgrid(r, th, indexing="ij")
    F = fn(cx + R * np.cos(T), cy + R * np.sin(T))
    return float(np.sum(wr * r * F.sum(axis=1)) * 2 * np.pi / m)


def _grid_count(rho, omega, grid, n=None):
    fn = lambda X, Y: _density_on(rho, omega, X, Y)  # noqa: E731
    if grid.disk_radius is not None:
        n = n or grid.nx
        return lambda k: _disk_integral(fn, grid.disk_radius, 0.0, 0.0, n * k)
    n = n or grid.nx
    n += (n + 1) % 2
    return lambda k: _rect_integral(fn, grid.x0, grid.x1, grid.y0, grid.y1, (n - 1) * k + 1)


def dislocation_count(rho, omega, grid=None, plane_radius=None):
    """``N = int rho omega`` over a grid domain or the whole plane.

    Parameters
    ----------
    rho : ScalarField2, str or number
    omega : AreaForm2 or Metric2
    grid : GridSpec, optional
        Rectangle or disk.  Required unless ``plane_radius`` is given.
    plane_radius : float, optional
        Integrate over disks of radius ``R, 2R, 4R`` and extrapolate to the
        whole plane assuming geometric convergence.

    Returns
    -------
    CountResult
    """
    if isinstance(omega, Metric2):
        omega = AreaForm2(omega)
    if plane_radius is not None:
        n = grid.nx if grid is not None else 64
        fn = lambda X, Y: _density_on(rho, omega, X, Y)  # noqa: E731
        radii = (plane_radius, 2 * plane_radius, 4 * plane_radius)
        vals = [_disk_integral(fn, R, 0.0, 0.0, 4 * n) for R in radii]
        value, err = aitken(vals)
        result = CountResult(value, err, radii, tuple(vals))
    else:
        q = _grid_count(rho, omega, grid)
        coarse, fine = q(1), q(2)
        result = CountResult(float(fine), float(abs(fine - coarse)))
    if result.value == 0.0:
        warnings.warn("dislocation count is zero; a defect distribution needs N > 0", stacklevel=2)
    return result


def aitken(seq):
    """Aitken extrapolation of three terms with an error estimate."""
    s0, s1, s2 = seq
    d1, d2 = s1 - s0, s2 - s1
    den = d2 - d1
    if abs(den) <= 1e-15 * max(1.0, abs(s2)) or d1 == 0 or d2 / d1 <= 0 or d2 / d1 >= 1:
        return float(s2), float(abs(d2))
    lim = s2 - d2 * d2 / den
    return float(lim), float(abs(lim - s2))


# ---------------------------------------------------------------------------
# effective dislocation lines


@dataclass
class LineCongruence:
    """Unit field a-orthogonal to the Burgers vector and its integral curves.

    Attributes
    ----------
    direction : callable
        ``direction(p)`` returns the contravariant unit field at ``p``.
    lines : list of ndarray, shape (m, 2)
    truncated : list of bool
        Whether each line stopped early (domain exit or vanishing ``b``).
    """

    direction: object
    lines: list
    truncated: list


def line_direction(e, rho, a, p):
    """a-unit vector a-orthogonal to ``b`` with ``l^1 >= 0`` (ties ``l^2 > 0``)."""
    p = as_point(p)
    d = burgers_from_frame(e, rho, 1, p, a)
    b = d.b
    m = a.jets(p, 0)
    g = values(m.g)
    sq = m.sqrt_det.value
    if np.any(np.sqrt(np.einsum("ab...,a...,b...->...", g, b, b)) <= 1e-14):
        raise ConstraintError("Burgers vector vanishes; no line direction")
    # l^k = a^{kl} eps_{lm} b^m / sqrt(a) is a-orthogonal to b with |l| = |b|
    inv = values(m.inv)
    eps = EPS.reshape((2, 2) + (1,) * np.ndim(sq))
    l = np.einsum("kl...,lm...,m...->k...", inv, eps, b) * sq
    l = l / np.sqrt(np.einsum("ab...,a...,b...->...", g, l, l))
    flip = (l[0] < 0) | ((l[0] == 0) & (l[1] <= 0))
    return np.where(flip, -l, l)


def line_congruence(d, a, seeds, step, steps=100):
    """Integrate effective dislocation lines through ``seeds``.

    Parameters
    ----------
    d : DislocationField
        Provides the frame and density.
    a : Metric2
    seeds : sequence of points
    step : float
        Fixed RK4 step in the curve parameter.
    """
    e, rho = d.frame, d.density

    def direction(p):
        return line_direction(e, rho, a, p)

    domain = intersect(e.domain, a.domain)
    lines, flags = [], []
    for s in seeds:
        s = as_point(s)
        y = np.array([float(s.u1), float(s.u2)])
        pts = [y.copy()]
        cut = False
        for _ in range(steps):
            try:
                k1 = direction(tuple(y))
                k2 = direction(tuple(y + 0.5 * step * k1))
                k3 = direction(tuple(y + 0.5 * step * k2))
                k4 = direction(tuple(y + step * k3))
            except (DomainError, ConstraintError):
                cut = True
                break
            y = y + step * (k1 + 2 * k2 + 2 * k3 + k4) / 6
            if not domain.contains(y[0], y[1]):
                cut = True
                break
            pts.append(y.copy())
        lines.append(np.array(pts))
        flags.append(cut)
    return LineCongruence(direction, lines, flags)


# ---------------------------------------------------------------------------
# teleparallelism


def teleparallel_connection(e):
    """Connection ``Gamma^k_{ab} = e_c^k d_a e^c_b`` making the frame parallel."""

    def gamma(p, order):
        E, Co, _ = e.jets(p, order + 1)
        out = [[[None] * 2 for _ in R2] for _ in R2]
        for k, al, b in product(R2, R2, R2):
            out[k][al][b] = sum(
                (E[c][k].truncate(order) * Co[c][b].d(al) for c in R2),
                start=0.0 * E[0][0].truncate(order),
            )
        return out

    return Connection2("teleparallel", gamma, 2, e.domain)


def frame_torsion(e, p):
    """Frame components ``T_{ab}^c`` of the teleparallel torsion."""
    c = teleparallel_connection(e)
    p = as_point(p)
    G = c.at(p)
    T = G - np.swapaxes(G, 1, 2)  # [k, al, be]
    E, Co, _ = e.at(p)
    return np.einsum("kxy...,ax...,by...,ck...->abc...", T, E, E, Co)


def self_balance_residual(e, a, p, tol=1e-8):
    """``div_a e_b - C_{ab}^a`` for an a-orthonormal frame.

    Raises
    ------
    ConstraintError
        If the frame is not a-orthonormal at ``p``.
    """
    p = as_point(p)
    E, _, _ = e.at(p)
    g = a.at(p)
    gram = np.einsum("kl...,ak...,bl...->ab...", g, E, E)
    eye = np.eye(2).reshape((2, 2) + (1,) * (gram.ndim - 2))
    if np.max(np.abs(gram - eye)) > tol:
        raise ConstraintError("self-balance needs an a-orthonormal frame")
    C = anholonomy(e, p)
    tb = np.einsum("aba...->b...", C)
    return np.stack([div_a(e.vector(b), a, p) - tb[b] for b in R2])


def rotate_frame(e, theta):
    """Local rotation ``e~_1 = cos e_1 + sin e_2``, ``e~_2 = -sin e_1 + cos e_2``."""
    theta = as_field(theta)
    c, s = cos(theta), sin(theta)
    E = e.e
    return Frame2(
        (c * E[0][0] + s * E[1][0], c * E[0][1] + s * E[1][1]),
        (-s * E[0][0] + c * E[1][0], -s * E[0][1] + c * E[1][1]),
    )


def alignment_angle(t1, t2):
    """Constant rotation angle turning ``[e_1, e_2] = t_2 e_1 - t_1 e_2`` into a multiple of ``e~_1``."""
    return float(np.arctan2(-t1, t2))


@dataclass
class TeleparallelReport:
    """Structure-function survey of a frame over a grid.

    Attributes
    ----------
    kind : str
        ``commutative``, ``constant`` or ``varying``.
    spread : float
        Max over components of ``max C - min C``.
    jacobi_residual : float
    C_mean : ndarray ``[a, b, c]``
    """

    kind: str
    spread: float
    jacobi_residual: float
    C_mean: np.ndarray


def jacobi_residual(e, p):
    """Max of the cyclic sum ``[[e_a, e_b], e_c] + cyclic`` expanded through ``C``.

    ``sum_cyc (e_c(C_{ab}^d) + C_{ab}^m C_{mc}^d)``; trivially zero in two
    dimensions, evaluated for completeness.
    """
    p = as_point(p)
    Cj = anholonomy_jets(e, p, 1)
    E, _, _ = e.jets(p, 0)
    Ev = values(E)
    out = 0.0
    for a, b, c in product(R2, R2, R2):
        tot = 0.0
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            for dd in R2:
                dC = sum(Ev[z][k] * Cj[x][y][dd].d(k).value for k in R2)
                quad = sum(Cj[x][y][m].value * Cj[m][z][dd].value for m in R2)
                tot = tot + dC + quad
        out = max(out, float(np.max(np.abs(tot))))
    return out


def closed_teleparallelism_check(e, grid, tol=1e-10):
    """Classify the frame's structure functions over ``grid``."""
    p = grid.points()
    C = anholonomy(e, p)
    spread = float(np.max(C.max(axis=-1) - C.min(axis=-1)))
    jac = jacobi_residual(e, p)
    if np.max(np.abs(C)) <= tol:
        kind = "commutative"
    elif spread <= tol * max(1.0, float(np.max(np.abs(C)))):
        kind = "constant"
    else:
        kind = "varying"
    return TeleparallelReport(kind, spread, jac, C.mean(axis=-1))


def isothermal_residual(a, w, r, p):
    """``div_a w + 2K - r`` and ``F_12 = d_1 eps_2 - d_2 eps_1`` with ``eps = w / 2``."""
    if not w.covariant:
        raise ValueError("isothermal residual expects a covector w")
    p = as_point(p)
    res = div_a(w, a, p) + 2.0 * gauss_curvature(a, p) - r
    e1, e2 = w.v1.jet(p, 1), w.v2.jet(p, 1)
    F12 = 0.5 * (e2.d(0).value - e1.d(1).value)
    return res, F12
