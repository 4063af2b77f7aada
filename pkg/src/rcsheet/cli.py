"""Command-line front end.

Configs are INI files with one section per subcommand; field values are
expressions in the field grammar.  Exit codes: 0 when every check passes,
1 when a check fails, 2 for usage or configuration errors.
"""

import argparse
import configparser
import csv
import io
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .dislocation import flatness_defect, solve_flat_potential, vectorial_connection
from .errors import RcsheetError
from .fieldcalc import GridSpec, HolomorphicField, Point2, parse_field
from .geodesic import GeodesicState, conformal_geodesic, integrate_geodesic
from .geometry import (
    AreaForm2,
    Metric2,
    VectorField2,
    assemble_connection,
    canonical_transform,
    curvature_of,
    density_identity_residuals,
    gauss_curvature,
    gradient,
    levi_civita,
    nonmetricity_of,
    ricci_identity_residuals,
    statement1_residual,
    torsion_of,
    vectorial_torsion_residual,
    values,
    volume_compatibility,
)
from .gravity2d import (
    Branch,
    ClassISolution,
    ClassIISolution,
    Couplings,
    action_eval,
    class1_build,
    class2_build,
    el_residual,
    field_invariants,
)
from .lattice import LatticeModel

__all__ = ["ConfigError", "Report", "main"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# Nontrivial defaults so that the identity suite exercises every term.
IDENTITY_DEFAULTS = {
    "a11": "1",
    "a12": "0",
    "a22": "1",
    "scalar": "sin(x)*exp(y/2) + x^2*y",
    "vector_x": "cos(y) + x*y",
    "vector_y": "x^3 - sin(x*y)",
    "potential": "0.3*x^2 - 0.2*x*y + sin(y)/2",
    "sigma": "0.25*sin(x + 2*y) + 0.1*x^2",
    "q111": "0.2*x*y",
    "q112": "0.1*sin(y)",
    "q121": "-0.3*x",
    "q122": "0.05*x^2",
    "q211": "0.1*cos(x)",
    "q212": "0.2*y^2",
    "q221": "0.15*x*y",
    "q222": "-0.1*y",
    "center_x": "0",
    "center_y": "0",
    "half_width": "0.5",
    "points": "20",
    "seed": "0",
    "tol": "1e-8",
}


class ConfigError(RcsheetError, ValueError):
    """Missing or invalid configuration entry."""


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)


@dataclass
class Report:
    """Named residual checks plus free-form metadata lines."""

    title: str
    checks: list = field(default_factory=list)
    meta: list = field(default_factory=list)

    def add(self, name, residual, tolerance):
        self.checks.append(Check(name, float(residual), float(tolerance)))

    def note(self, key, value):
        self.meta.append((key, value))

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def text(self):
        out = [f"# report: {self.title}", f"# version: {__version__}"]
        out += [f"# {k}: {_fmt(v)}" for k, v in self.meta]
        out.append("name residual tolerance pass")
        for c in self.checks:
            out.append(f"{c.name} {c.residual:.6e} {c.tolerance:.3e} {'PASS' if c.passed else 'FAIL'}")
        return "\n".join(out) + "\n"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


# ---------------------------------------------------------------------------
# config access


class _Section:
    def __init__(self, parser, name, defaults=None):
        if name not in parser:
            raise ConfigError(f"config has no [{name}] section")
        self.name = name
        self.sec = parser[name]
        self.defaults = defaults or {}

    def raw(self, key, default=None):
        if key in self.sec:
            return self.sec[key].strip().strip('"').strip("'")
        if key in self.defaults:
            return self.defaults[key]
        if default is not None:
            return default
        raise ConfigError(f"[{self.name}] missing key {key!r}")

    def has(self, key):
        return key in self.sec or key in self.defaults

    def float(self, key, default=None):
        text = self.raw(key, None if default is None else str(default))
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key} = {text!r} is not a number") from None

    def int(self, key, default=None):
        v = self.float(key, default)
        if v != int(v):
            raise ConfigError(f"[{self.name}] {key} must be an integer")
        return int(v)

    def field(self, key, default=None):
        text = self.raw(key, default)
        try:
            return parse_field(text)
        except ValueError as exc:
            raise ConfigError(f"[{self.name}] {key}: {exc}") from None


def _load(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return parser


def _metric(sec):
    """Conformal ``scale * exp(-2 phi) delta`` when ``phi`` is given, else components."""
    if "phi" in sec.sec:
        return Metric2.conformal(sec.field("phi"), scale=sec.float("scale", 1.0))
    return Metric2(sec.field("a11"), sec.field("a12"), sec.field("a22"))


def _grid(sec):
    if sec.has("radius"):
        return GridSpec.disk(sec.float("radius"), sec.int("n"))
    if sec.has("half_width") and sec.has("n"):
        return GridSpec.square(sec.float("half_width"), sec.int("n"))
    return GridSpec(
        sec.float("x0"), sec.float("x1"), sec.float("y0"), sec.float("y1"), sec.int("nx"), sec.int("ny")
    )


def _write_csv(path, header, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([f"{float(v):.17g}" for v in row])
    data = buf.getvalue()
    if path is None or path == "-":
        sys.stdout.write(data)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)


# ---------------------------------------------------------------------------
# commands


def cmd_identities(parser, tol=None):
    sec = _Section(parser, "identities", IDENTITY_DEFAULTS)
    a = _metric(sec)
    t0 = sec.float("tol") if tol is None else tol
    n = sec.int("points")
    seed = sec.int("seed")
    hw = sec.float("half_width")
    rng = np.random.default_rng(seed)
    cx, cy = sec.float("center_x"), sec.float("center_y")
    p = Point2(cx + rng.uniform(-hw, hw, n), cy + rng.uniform(-hw, hw, n))
    Q = [[[sec.field(f"q{k + 1}{i + 1}{j + 1}") for j in range(2)] for i in range(2)] for k in range(2)]
    f = sec.field("scalar")
    u = VectorField2(sec.field("vector_x"), sec.field("vector_y"))
    psi = sec.field("potential")
    sigma = sec.field("sigma")

    rep = Report("identities")
    rep.note("points", n)
    rep.note("seed", seed)
    rep.note("box", f"[{cx - hw}, {cx + hw}] x [{cy - hw}, {cy + hw}]")

    c = assemble_connection(a, Q)
    rep.add("statement1", statement1_residual(c, p), t0)
    rs, rv = ricci_identity_residuals(c, f, u, p)
    rep.add("ricci_identity_scalar", rs, t0)
    rep.add("ricci_identity_vector", rv, t0)
    rep.add("torsion_roundtrip", vectorial_torsion_residual(torsion_of(c, p)), t0)
    nm = nonmetricity_of(c, a, p)
    rep.add("difference_roundtrip", np.max(np.abs(nm.Q - nm.difference)), t0)
    inv = values(a.jets(p, 0).inv)
    rep.add("shear_traceless", np.max(np.abs(np.einsum("ns...,ans...->a...", inv, nm.P))), t0)
    d1, d2 = density_identity_residuals(a, p)
    rep.add("density_contraction", d1, t0)
    rep.add("density_product", d2, t0)
    vc = volume_compatibility(c, a, AreaForm2(a, psi), p)
    rep.add("volume_formula", vc.formula_error, t0)

    # gradient torsion t = d(potential): exactly one sign of the density exponent is compatible
    cv = vectorial_connection(a, gradient(psi))
    plus = volume_compatibility(cv, a, AreaForm2(a, psi), p).compatible_defect
    minus = volume_compatibility(cv, a, AreaForm2(a, -1.0 * psi), p).compatible_defect
    rep.add("volume_compatible_sign", plus, t0)
    rep.note("volume_opposite_sign_defect", minus)

    a2, c2 = canonical_transform(a, cv, sigma)
    k1, k2 = curvature_of(cv, a, p), curvature_of(c2, a2, p)
    rep.add("canonical_curvature", np.max(np.abs(k1.R - k2.R)), t0)
    rep.add("canonical_ricci", np.max(np.abs(k1.ricci - k2.ricci)), t0)
    es = np.exp(2.0 * sigma(p))
    rep.add("canonical_scalar", np.max(np.abs(k2.scalar - es * k1.scalar) / np.maximum(1.0, np.abs(k2.scalar))), t0)
    rep.add("canonical_traceless_torsion", np.max(np.abs(torsion_of(cv, p).L - torsion_of(c2, p).L)), t0)

    K = gauss_curvature(a, p)
    rep.note("gauss_curvature_min", float(np.min(K)))
    rep.note("gauss_curvature_max", float(np.max(K)))
    return rep, None


def _couplings(sec):
    sig, mu = sec.float("sigma", 1.0), sec.float("mu", 1.0)
    if sec.has("Lambda") or "lambda_" in sec.sec:
        key = "Lambda" if sec.has("Lambda") else "lambda_"
        return Couplings.from_Lambda(sec.float(key), sig, mu)
    return Couplings(sig, mu, sec.float("lam"))


def cmd_solve(parser, tol=None):
    sec = _Section(parser, "solve")
    kind = sec.raw("class").lower()
    try:
        c = _couplings(sec)
        w = HolomorphicField.from_spec(sec.raw("w", "identity"))
    except ValueError as exc:
        raise ConfigError(f"[solve] {exc}") from None
    grid = _grid(sec)
    t0 = sec.float("tol", 1e-6) if tol is None else tol
    if kind in ("i", "1"):
        sol = ClassISolution(
            Branch(sec.raw("branch", "lower").lower()),
            sec.float("a_c"),
            sec.float("d_c"),
            complex(sec.float("b_re", 0.0), sec.float("b_im", 0.0)),
            w,
            c,
        )
        state = class1_build(sol, grid)
    elif kind in ("ii", "2"):
        sol = ClassIISolution(c, sec.float("A", 0.0), sec.float("h0"), w, step=sec.float("step", 1e-3))
        state = class2_build(sol, grid)
    else:
        raise ConfigError(f"[solve] class must be 'i' or 'ii', got {kind!r}")

    p = grid.points()
    inv = field_invariants(state, p)
    a = state.metric()
    el = el_residual(state, c, p)
    K = gauss_curvature(a, p)
    sqrt_a = a.jets(p, 0).sqrt_det.value
    rep = Report("solve")
    rep.note("state", state.label)
    rep.note("couplings", f"sigma={c.sigma} mu={c.mu} lam={c.lam} Lambda={c.Lambda}")
    rep.note("grid", f"{grid.nx}x{grid.ny} [{grid.x0}, {grid.x1}] x [{grid.y0}, {grid.y1}]")
    rep.add("el_residual", el.max, t0)
    if sec.has("plane_radius") or sec.has("integrate"):
        pr = sec.float("plane_radius") if sec.has("plane_radius") else None
        ar = action_eval(state, c, grid, plane_radius=pr)
        rep.note("action", ar.action)
        rep.note("area", ar.area)
        rep.note("mean_R", ar.mean_R)
        rep.note("gauss_bonnet", ar.gauss_bonnet)
        rep.note("chi_gauss_bonnet", ar.chi_gauss_bonnet)
        rep.note("chi_r0", ar.chi_r0)
    cols = [p.u1, p.u2, state.phi(p), state.aux(p) * np.ones_like(p.u1), inv.R, np.sqrt(inv.torsion_sq), K, sqrt_a]
    return rep, (["x", "y", "phi", "aux", "R", "T", "K", "sqrt_a"], cols)


def cmd_geodesic(parser, tol=None):
    sec = _Section(parser, "geodesic")
    phi = sec.field("phi", "0")
    z0 = complex(sec.float("x0", 0.0), sec.float("y0", 0.0))
    v0 = complex(sec.float("vx", 1.0), sec.float("vy", 0.0))
    steps, dtau = sec.int("steps", 1000), sec.float("dtau", 1e-3)
    mode = sec.raw("mode", "conformal").lower()
    t0 = sec.float("tol", 1e-6) if tol is None else tol
    if steps < 1 or not dtau > 0:
        raise ConfigError("[geodesic] steps must be >= 1 and dtau > 0")
    if v0 == 0:
        raise ConfigError("[geodesic] initial velocity must be nonzero")
    if mode == "conformal":
        tr = conformal_geodesic(phi, z0, v0, steps, dtau)
        fi = tr.first_integral
    elif mode == "component":
        a = Metric2.conformal(phi)
        tr = integrate_geodesic(levi_civita(a), GeodesicState(0.0, (z0.real, z0.imag), (v0.real, v0.imag)), steps, dtau)
        fi = tr.speed
    else:
        raise ConfigError(f"[geodesic] mode must be 'conformal' or 'component', got {mode!r}")
    rep = Report("geodesic")
    rep.note("mode", mode)
    rep.note("steps", len(tr) - 1)
    rep.note("truncated", tr.truncated)
    rep.add("first_integral_drift", np.ptp(fi), t0)
    cols = [tr.s, tr.position[:, 0], tr.position[:, 1], tr.velocity[:, 0], tr.velocity[:, 1], fi]
    return rep, (["tau", "x", "y", "vx", "vy", "first_integral"], cols)


def cmd_flatness(parser, tol=None):
    sec = _Section(parser, "flatness")
    a = _metric(sec)
    grid = _grid(sec)
    if grid.disk_radius is not None:
        raise ConfigError("[flatness] needs a rectangular grid")
    boundary = sec.field("boundary")
    h = max(grid.hx, grid.hy)
    t0 = sec.float("tol", 5 * h * h) if tol is None else tol
    sol = solve_flat_potential(a, grid, boundary)
    defects = sol.flatness_defects()
    rep = Report("flatness")
    rep.note("grid", f"{grid.nx}x{grid.ny}")
    rep.note("h", h)
    rep.note("solver", f"{sol.method} iterations={sol.iterations} residual={sol.residual:.3e}")
    rep.add("flatness_defect", np.max(np.abs(defects)), t0)
    if sec.has("exact"):
        ex = sec.field("exact")
        rep.add("potential_error", sol.max_error(ex), t0)
        X, Y = grid.mesh()
        rep.note("exact_defect_max", float(np.max(np.abs(flatness_defect(a, gradient(ex), Point2(X, Y))))))
    return rep, None


def cmd_lattice(parser, args):
    d, m, n = args.d, args.m, args.n
    if parser is not None and "lattice" in parser:
        sec = _Section(parser, "lattice")
        d = sec.float("d", d if d is not None else 1.42) if d is None else d
        m = sec.int("m") if m is None else m
        n = sec.int("n") if n is None else n
    d = 1.42 if d is None else d
    if m is None or n is None:
        raise ConfigError("lattice needs --m and --n (or a [lattice] section)")
    try:
        b = LatticeModel(d).burgers(m, n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return b


# ---------------------------------------------------------------------------
# entry point


def _build_parser():
    ap = argparse.ArgumentParser(prog="rcsheet", description="Riemann-Cartan sheet geometry toolkit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("identities", "run geometric identity checks"),
        ("solve", "build an explicit field-equation solution on a grid"),
        ("geodesic", "integrate a geodesic of a conformal metric"),
        ("flatness", "solve the flatness Poisson problem"),
        ("lattice", "graphene Burgers vector"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="INI config file")
        sp.add_argument("--out", help="output path (CSV or report)")
        sp.add_argument("--tol", type=float, help="override every check tolerance")
        if name == "lattice":
            sp.add_argument("--m", type=int)
            sp.add_argument("--n", type=int)
            sp.add_argument("--d", type=float, help="nearest-neighbour distance in angstrom")
    return ap


COMMANDS = {
    "identities": cmd_identities,
    "solve": cmd_solve,
    "geodesic": cmd_geodesic,
    "flatness": cmd_flatness,
}


def main(argv=None):
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        parser = _load(args.config) if args.config else None
        if args.command == "lattice":
            b = cmd_lattice(parser, args)
            line = (
                f"burgers m={b.m} n={b.n} vector=({b.vector[0]:.6f}, {b.vector[1]:.6f}) Å "
                f"strength={b.strength:.2f} Å ({b.strength:.12g})\n"
            )
            if args.out:
                with open(args.out, "w", encoding="utf-8", newline="") as fh:
                    fh.write(line)
            else:
                sys.stdout.write(line)
            return EXIT_OK
        if parser is None:
            if args.command != "identities":
                raise ConfigError(f"{args.command} needs --config")
            parser = configparser.ConfigParser()
            parser.read_dict({"identities": {}})
        report, table = COMMANDS[args.command](parser, args.tol)
    except (ConfigError, RcsheetError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    if table is not None:
        _write_csv(args.out, *table)
        # keep stdout clean when it carries the CSV
        (sys.stderr if args.out in (None, "-") else sys.stdout).write(report.text())
    elif args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(report.text())
    else:
        sys.stdout.write(report.text())
    return EXIT_OK if report.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
