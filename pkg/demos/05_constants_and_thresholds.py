"""Estimate the functional-inequality constants that locate the constant
regimes.

Two thresholds bracket the phase diagram on a given domain:

  - below kappa_gamma(gamma) the vertical constants +-e3 are the only
    minimizers; the formula combines the domain constant c_Omega =
    2 / diam(Omega) with an interpolation weight delta_gamma.
  - above gamma_kappa(kappa) = 1 / (c_trace min(1, kappa)) only the
    in-plane constants minimize; it needs the trace constant c_trace of
    the domain, estimated here by inverse power iteration on the
    associated generalized eigenproblem.

Both rest on quadratic inequalities that can be sampled directly, which
the Poincare sampler below does with random test functions.
"""

import json

import numpy as np

from spheremin.constants import (
    estimate_trace_constant,
    gamma_threshold,
    kappa_threshold,
    threshold_report,
    trace_constant_dense,
    verify_poincare_inequality,
)
from spheremin.mesh import build_disk_mesh

mesh = build_disk_mesh(24, 48, 1.0)

# thresholds on the unit disk (diameter 2, so c_Omega = 1)
c_omega, delta, kappa_g = kappa_threshold(1.0, mesh)
print("gamma = 1: c_Omega = %.1f  delta_gamma = %.3f  kappa_gamma = %.3f"
      % (c_omega, delta, kappa_g))

# the trace constant: sparse inverse power iteration vs a dense eigensolve
c_sparse = estimate_trace_constant(mesh)
c_dense = trace_constant_dense(mesh)
print("trace constant: sparse %.12f  dense %.12f  gap %.1e"
      % (c_sparse, c_dense, abs(c_sparse - c_dense)))
print("  c^2 = %.6f stays below the constant-function bound 0.5"
      % c_sparse ** 2)

# refining the mesh drives c toward the continuum Steklov value
# sqrt(I1(1)/I0(1)) = 0.668124... (modified Bessel functions)
for nr in (12, 24, 48):
    c = estimate_trace_constant(build_disk_mesh(nr, 2 * nr, 1.0))
    print("  nr = %2d   c = %.10f" % (nr, c))

# gamma threshold at kappa = 2 from the measured constant
print("gamma_kappa(2) = %.6f" % gamma_threshold(2.0, c_sparse))

# sample the Poincare-with-boundary inequality with random test functions
for delta in (0.1, 0.5, 0.9):
    slack = verify_poincare_inequality(mesh, delta, trials=500, rng_seed=0)
    print("delta = %.1f: min inequality slack over 500 draws = %.4f" %
          (delta, slack))

# the bundled report, JSON-ready
report = threshold_report(mesh, kappa=2.0, gamma=0.3)
print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
