"""Geodesic integration, parametrization and metric-affine consistency.

The pregeodesic factor ``h(t)`` used by :func:`natural_parameter` is an
arbitrary positive function along a curve and is unrelated to the
solution profile ``h`` of :mod:`rcsheet.gravity2d`.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .errors import ConvergenceError, DomainError, NonFiniteError
from .fieldcalc import Point2, as_field, as_point
from .geometry import nonmetricity_of

__all__ = [
    "GeodesicState",
    "GeodesicTrace",
    "ReparamResult",
    "affine_consistency",
    "conformal_geodesic",
    "integrate_geodesic",
    "natural_parameter",
    "reparam_geodesic_residual",
    "reparam_solve",
]


@dataclass(frozen=True)
class GeodesicState:
    """Parameter value, position and velocity ``(s, gamma, dgamma/ds)``."""

    s: float
    position: tuple
    velocity: tuple

    def __post_init__(self):
        v = np.asarray(self.velocity, dtype=float)
        if v.shape != (2,) or not np.any(v != 0):
            raise ValueError("initial velocity must be a nonzero 2-vector")
        object.__setattr__(self, "position", tuple(float(x) for x in np.asarray(self.position, float)))
        object.__setattr__(self, "velocity", tuple(float(x) for x in v))


@dataclass
class GeodesicTrace:
    """Sampled geodesic.

    Attributes
    ----------
    s : ndarray, shape (n,)
        Parameter, strictly increasing.
    position, velocity : ndarray, shape (n, 2)
    speed : ndarray or None
        ``|dgamma/ds|_a`` when a metric is known.
    first_integral : ndarray or None
        ``|dz/dtau| exp(-phi)`` for conformal traces.
    length : ndarray or None
        Accumulated ``xi`` with ``dxi^2 = exp(-2 phi) dz dzbar``.
    truncated : bool
        Whether integration stopped early (domain exit).
    """

    s: np.ndarray
    position: np.ndarray
    velocity: np.ndarray
    speed: np.ndarray = None
    first_integral: np.ndarray = None
    length: np.ndarray = None
    truncated: bool = False
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.s)

    def state(self, i):
        return GeodesicState(self.s[i], self.position[i], self.velocity[i])

    @property
    def z(self):
        return self.position[:, 0] + 1j * self.position[:, 1]


def _rk4(rhs, y, ds, steps, inside):
    out = [y.copy()]
    truncated = False
    for _ in range(steps):
        try:
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * ds * k1)
            k3 = rhs(y + 0.5 * ds * k2)
            k4 = rhs(y + ds * k3)
        except DomainError:
            truncated = True
            break
        y_new = y + ds * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        if not np.all(np.isfinite(y_new)):
            raise NonFiniteError("geodesic integration produced non-finite values")
        if not inside(y_new):
            truncated = True
            break
        y = y_new
        out.append(y.copy())
    return np.array(out), truncated


def integrate_geodesic(c, init, steps, ds, symmetric_only=False, metric=None):
    """Integrate ``d^2 g^a/ds^2 + Gamma^a_{bk} g'^b g'^k = 0`` with classical RK4.

    Parameters
    ----------
    c : Connection2
    init : GeodesicState
    steps : int
    ds : float
        Fixed step, ``> 0``.
    symmetric_only : bool
        Use ``Gamma^a_{(bk)}``; the trajectory is the same.
    metric : Metric2, optional
        Used for the speed diagnostic (defaults to ``c.metric``).

    Returns
    -------
    GeodesicTrace
        Truncated (flagged) if the curve leaves the connection's domain.
    """
    if not ds > 0:
        raise ValueError("step must be positive")
    if ds < 1e-14:
        raise ConvergenceError("step underflow")

    def rhs(y):
        G = c.at((y[0], y[1]))
        if symmetric_only:
            G = 0.5 * (G + np.swapaxes(G, 1, 2))
        v = y[2:]
        return np.concatenate([v, -np.einsum("kab,a,b->k", G, v, v)])

    y0 = np.array(init.position + init.velocity, dtype=float)
    ys, cut = _rk4(rhs, y0, ds, steps, lambda y: bool(c.domain.contains(y[0], y[1])))
    s = init.s + ds * np.arange(len(ys))
    a = metric if metric is not None else c.metric
    speed = None
    if a is not None:
        g = a.at(Point2(ys[:, 0], ys[:, 1]))
        speed = np.sqrt(np.einsum("ab...,...a,...b->...", g, ys[:, 2:], ys[:, 2:]))
    return GeodesicTrace(s, ys[:, :2], ys[:, 2:], speed=speed, truncated=cut)


def natural_parameter(trace, h, s0=0.0, c=1.0):
    """Reparametrize a pregeodesic by ``s = s0 + c int dt / h(t)``.

    Parameters
    ----------
    trace : GeodesicTrace
        Sampled at parameter values ``t = trace.s``.
    h : callable or array_like
        Positive pregeodesic factor, as a function of ``t`` or sampled.
    s0, c : float
        Affine freedom, ``c > 0``.
    """
    t = np.asarray(trace.s, dtype=float)
    hv = np.asarray(h(t) if callable(h) else h, dtype=float) * np.ones_like(t)
    if np.any(hv <= 0):
        raise ValueError("pregeodesic factor must be positive")
    if not c > 0:
        raise ValueError("scale c must be positive")
    s = s0 + c * cumulative_simpson(1.0 / hv, x=t, initial=0.0)
    vel = trace.velocity * (hv / c)[:, None]
    return replace(trace, s=s, velocity=vel, speed=None)


def affine_consistency(c, a, trace):
    """``u^a u^n u^s W_{ans}`` along a trace, with ``W_{ans} = -nabla_a a_{ns}``.

    Along a geodesic ``d/ds |u|_a^2 = -u^a u^n u^s W_{ans}``, so the samples
    vanish exactly when the metric arclength is an affine parameter.
    """
    p = Point2(trace.position[:, 0], trace.position[:, 1])
    W = nonmetricity_of(c, a, p).W_low
    u = trace.velocity.T
    return np.einsum("ans...,a...,n...,s...->...", W, u, u, u)


def conformal_geodesic(phi, z0, v0, steps, dtau):
    """Integrate ``d^2 z/dtau^2 = 2 phi_z (dz/dtau)^2`` with RK4.

    The arclength ``xi`` with ``dxi = exp(-phi) |dz|`` is carried as an
    extra state component.

    Returns
    -------
    GeodesicTrace
        ``first_integral`` holds ``|dz/dtau| exp(-phi)`` and ``length`` the
        accumulated ``xi``.
    """
    phi = as_field(phi)
    if v0 == 0:
        raise ValueError("initial velocity must be nonzero")

    def rhs(y):
        z = y[0] + 1j * y[1]
        v = y[2] + 1j * y[3]
        if v == 0:
            raise ConvergenceError("velocity vanished during integration")
        J = phi.jet(as_point(z), 1)
        pz = 0.5 * (J.partial(1, 0) - 1j * J.partial(0, 1))
        acc = 2.0 * pz * v * v
        return np.array([v.real, v.imag, acc.real, acc.imag, np.exp(-J.value) * abs(v)])

    y0 = np.array([np.real(z0), np.imag(z0), np.real(v0), np.imag(v0), 0.0])
    ys, cut = _rk4(rhs, y0, dtau, steps, lambda y: bool(phi.domain.contains(y[0], y[1])))
    tau = dtau * np.arange(len(ys))
    pos, vel = ys[:, :2], ys[:, 2:4]
    ph = phi(Point2(pos[:, 0], pos[:, 1]))
    fi = np.hypot(vel[:, 0], vel[:, 1]) * np.exp(-ph)
    return GeodesicTrace(tau, pos, vel, speed=fi, first_integral=fi, length=ys[:, 4], truncated=cut)


@dataclass
class ReparamResult:
    """``tau(t)`` solving ``tau'' - tau' sigma' = 0``.

    Attributes
    ----------
    t, tau, tau_dot : ndarray
    residual : float
        Max of ``|tau'' - tau' sigma'|`` from spline derivatives, relative
        to ``max |tau'|``.
    """

    t: np.ndarray
    tau: np.ndarray
    tau_dot: np.ndarray
    residual: float


def reparam_solve(sigma, t, tau0=0.0, tau_dot0=1.0):
    """Integrate ``tau' = tau_dot0 exp(sigma(t) - sigma(t0))`` by cumulative Simpson.

    Parameters
    ----------
    sigma : callable or array_like
        ``sigma`` along the curve, as a function of ``t`` or sampled at ``t``.
    t : array_like
        Increasing parameter samples.
    """
    t = np.asarray(t, dtype=float)
    sv = np.asarray(sigma(t) if callable(sigma) else sigma, dtype=float) * np.ones_like(t)
    tau_dot = tau_dot0 * np.exp(sv - sv[0])
    tau = tau0 + cumulative_simpson(tau_dot, x=t, initial=0.0)
    sp_s = CubicSpline(t, sv)
    sp_d = CubicSpline(t, tau_dot)
    inner = slice(2, -2) if len(t) > 8 else slice(None)
    res = sp_d(t, 1) - tau_dot * sp_s(t, 1)
    scale = max(1.0, float(np.max(np.abs(tau_dot))))
    return ReparamResult(t, tau, tau_dot, float(np.max(np.abs(res[inner]))) / scale)


def reparam_geodesic_residual(target, trace, reparam, substeps=1):
    """Compare a reparametrized trace with a geodesic of ``target``.

    The geodesic of ``target`` starting at ``trace.position[0]`` with
    velocity ``trace.velocity[0] / tau'(t0)`` is integrated in ``tau`` with
    RK4 on a uniform grid; the trace is interpolated to the same ``tau``
    values and the max position difference is returned.
    """
    tau = reparam.tau - reparam.tau[0]
    n = (len(tau) - 1) * substeps
    dtau = tau[-1] / n
    v0 = trace.velocity[0] / reparam.tau_dot[0]
    init = GeodesicState(0.0, trace.position[0], v0)
    ref = integrate_geodesic(target, init, n, dtau)
    m = len(ref.s)
    pos = CubicSpline(tau, trace.position, axis=0)(ref.s)
    return float(np.max(np.abs(pos - ref.position[:m])))
