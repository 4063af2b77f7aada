"""Curvature of a sphere chart, a torsion field that flattens it, and the Poisson route.

The metric ``(1 + r^2)^-2 delta`` has Gauss curvature 4.  A vectorial
connection with torsion covector ``t`` is flat exactly when
``K = div_a t``; the gradient ``t = grad_a ln(1 + r^2)`` satisfies this,
and the same potential is recovered numerically from ``Delta_a phi = K``.
"""

import numpy as np

from rcsheet.dislocation import flatness_defect, solve_flat_potential, vectorial_connection
from rcsheet.fieldcalc import GridSpec
from rcsheet.geometry import Metric2, curvature_of, gauss_curvature, grad_a, levi_civita

SPHERE = "ln(1+x^2+y^2)"
a = Metric2.conformal(SPHERE)
p = GridSpec.square(1.0, 11).points()

K = gauss_curvature(a, p)
print(f"Gauss curvature on the chart: min {K.min():.12f}, max {K.max():.12f}")
R_lc = np.max(np.abs(curvature_of(levi_civita(a), a, p).R))
print(f"Levi-Civita curvature components reach {R_lc:.3f}")

# the torsion field that cancels the curvature
t = grad_a(SPHERE, a)
R_flat = np.max(np.abs(curvature_of(vectorial_connection(a, t), a, p).R))
print(f"with t = grad_a ln(1+r^2): max curvature {R_flat:.1e}, max |K - div t| "
      f"{np.max(np.abs(flatness_defect(a, t, p))):.1e}")

# recover the potential from its boundary values
print("\nPoisson construction on [-0.8, 0.8]^2 (exact potential ln(1+r^2))")
print("   n        h       sup error   error/h^2")
prev = None
for n in (17, 33, 65, 129):
    g = GridSpec.square(0.8, n)
    err = solve_flat_potential(a, g, SPHERE).max_error(SPHERE)
    order = "" if prev is None else f"   order {np.log2(prev / err):.3f}"
    print(f"{n:4d}  {g.hx:.5f}  {err:.3e}   {err / g.hx**2:.4f}{order}")
    prev = err
