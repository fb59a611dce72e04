"""Sweep the (kappa, gamma) plane and classify each cell's minimizer.

Each cell keeps the least-energy candidate among the solver output and
the two constant states, so the label is the global-minimizer branch:
"constant-e3" at weak anisotropy, "constant-inplane" at strong pinning,
"nonconstant" in between.  Radial mode (shooting on the 1D reduction)
covers a grid in seconds; 2D mode repeats the classification with the
full disk solver on a few cells to show they agree.
"""

import time

import numpy as np

from spheremin.io import write_phase_diagram_csv
from spheremin.mesh import build_disk_mesh
from spheremin.minimize import SolveOptions
from spheremin.verify import phase_diagram_sweep

kappas = (0.5, 1.0, 2.0, 2.5, 3.0, 4.0)
gammas = (0.0, 0.1, 0.3, 0.5, 1.0, 2.0)

t0 = time.perf_counter()
radial = phase_diagram_sweep((1.0, 2), kappas, gammas, dr=0.004)
print("radial sweep of %dx%d cells in %.1f s"
      % (len(kappas), len(gammas), time.perf_counter() - t0))

# one row per kappa, one label letter per gamma
letters = {"constant-e3": "v", "constant-inplane": "h", "nonconstant": "*"}
print("        gamma:", "  ".join("%4.1f" % g for g in gammas))
for i, kappa in enumerate(kappas):
    row = "     ".join(letters[c] for c in radial.classes[i])
    print("  kappa %4.1f   %s" % (kappa, row))
print("  (v = vertical constant, h = in-plane constant, * = nonconstant)")

# threshold overlays computed per cell: cells well below kappa_gamma must
# be vertical, cells well above gamma_kappa must be in-plane (the sweep
# itself raises if those inclusions ever fail)
print("kappa_gamma at gamma = %.1f: %.4f   gamma_kappa at kappa = %.1f: %.4f"
      % (gammas[4], radial.kappa_gamma[0][4], kappas[3],
         radial.gamma_kappa[3][0]))

# persist the grid for plotting elsewhere
write_phase_diagram_csv("/tmp/phase_diagram.csv", radial)
print("wrote /tmp/phase_diagram.csv")

# the 2D solver reproduces the radial labels (a 2x2 sub-grid to stay quick)
mesh = build_disk_mesh(16, 32, 1.0)
t0 = time.perf_counter()
planar = phase_diagram_sweep(mesh, (0.5, 3.0), (0.1, 1.0), seeds=2,
                             options=SolveOptions(init_kind="radial-seed"))
print("2D sweep of 2x2 cells at 16x32 in %.1f s" % (time.perf_counter() - t0))
for i, kappa in enumerate((0.5, 3.0)):
    for j, gamma in enumerate((0.1, 1.0)):
        ii = kappas.index(kappa)
        jj = gammas.index(gamma)
        agree = planar.classes[i][j] == radial.classes[ii][jj]
        print("  kappa = %.1f gamma = %.1f: 2D says %-16s radial says %-16s"
              " agree = %s" % (kappa, gamma, planar.classes[i][j],
                               radial.classes[ii][jj], agree))
