"""Minimize the full 2D energy on the disk and verify the minimizer's
structure.

A converged nonconstant minimizer should be a meridian map: values on a
single great half-circle through +-e3 (m2 = 0 after rotation), radially
symmetric, with polar angle increasing from the center to the rim.  The
checks below measure each property directly on the discrete field.
"""

import numpy as np

from spheremin.energy import Params
from spheremin.mesh import build_disk_mesh
from spheremin.minimize import SolveOptions, canonicalize, minimize_sphere_field
from spheremin.radial import radial_energy, solve_radial_bvp
from spheremin.verify import lift_phase, meridian_deviation, radial_deviation, sign_consistency

mesh = build_disk_mesh(24, 48, 1.0)
params = Params(kappa=np.sqrt(8.0), gamma=0.1)

# seed from the radial profile; random seeds work too but can land in
# higher-energy local states at strong pinning
field, report = minimize_sphere_field(mesh, params,
                                      SolveOptions(init_kind="radial-seed"))
print("converged:", report.converged, " iterations:", report.iterations)
print("classification:", report.classification)
print("energy:", report.energy.to_dict())
print("projected gradient norm: %.2e" % report.gradient_norm)

# energy trace is strictly decreasing (each accepted step must decrease)
trace = report.energy_trace
print("energy trace: %d entries, monotone = %s, E0 = %.4f, E* = %.10f"
      % (len(trace), bool(np.all(np.diff(trace) < 0)), trace[0], trace[-1]))

# the 1D reduction gives the same energy and the same profile
profile = solve_radial_bvp(params, 1.0, 2)
print("radial energy: %.10f   (2D minus 1D = %+.2e)"
      % (radial_energy(profile, params).total,
         report.energy.total - radial_energy(profile, params).total))

# structure checks on the canonical representative
canon, applied = canonicalize(mesh, field)
phi = lift_phase(canon)
radii = np.hypot(mesh.nodes[:, 0], mesh.nodes[:, 1])
gap = np.max(np.abs(phi - np.interp(radii, profile.r, profile.u / 2)))
print("meridian deviation: %.2e" % meridian_deviation(canon, mesh))
print("radial deviation:   %.2e" % radial_deviation(mesh, phi))
print("phase range: [%.2e, %.6f]  (pi/2 = %.6f)"
      % (phi.min(), phi.max(), np.pi / 2))
print("m1 interior sign:", sign_consistency(canon, 0, mesh).verdict,
      "  m3 interior sign:", sign_consistency(canon, 2, mesh).verdict)
print("max |phi_2D - phi_1D| over the nodes: %.2e" % gap)
