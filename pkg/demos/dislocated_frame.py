"""Burgers vector, dislocation lines and counts for a non-holonomic frame.

The frame ``(d_x, e^x d_y)`` has commutator ``[e_1, e_2] = e^x d_y``, a
constant-strength field of edge dislocations.  Its effective dislocation
lines are the metric-orthogonal curves to the Burgers vector.
"""

import numpy as np

from rcsheet.dislocation import (
    Frame2,
    burgers_from_frame,
    closed_teleparallelism_check,
    dislocation_count,
    line_congruence,
    teleparallel_connection,
)
from rcsheet.fieldcalc import GridSpec
from rcsheet.geometry import Metric2, curvature_of

e = Frame2((1.0, 0.0), (0.0, "exp(x)"))
for x in (-0.5, 0.0, 0.5):
    d = burgers_from_frame(e, 1.0, p=(x, 0.0))
    print(f"x = {x:+.1f}: b = ({d.b[0]:.4f}, {d.b[1]:.4f}), t = ({d.t[0]:+.1f}, {d.t[1]:+.1f}), "
          f"strength {d.strength:.4f}")

# the frame metric and its teleparallel connection
a = e.metric()
c = teleparallel_connection(e)
p = GridSpec.square(1.0, 5).points()
print(f"\nteleparallel curvature: {np.max(np.abs(curvature_of(c, None, p).R)):.1e}")
rep = closed_teleparallelism_check(e, GridSpec.square(1.0, 7))
print(f"structure constants: {rep.kind}, Jacobi residual {rep.jacobi_residual:.1e}")

# lines run along the x-axis here
d = burgers_from_frame(e, 1.0, p=(0.0, 0.0))
lc = line_congruence(d, a, [(0.0, -0.5), (0.0, 0.0), (0.0, 0.5)], 0.05, 10)
for line in lc.lines:
    print(f"line from ({line[0, 0]:.2f}, {line[0, 1]:+.2f}) to ({line[-1, 0]:.2f}, {line[-1, 1]:+.2f})")

# number of dislocations: unit density over the sphere chart is its area, pi
res = dislocation_count(1.0, Metric2.conformal("ln(1+x^2+y^2)"), GridSpec.disk(1.0, 32), plane_radius=8.0)
print(f"\ncount on the whole sphere chart: {res.value:.6f} (pi = {np.pi:.6f}), error estimate {res.error:.1e}")
