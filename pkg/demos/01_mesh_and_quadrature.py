"""Build the two mesh kinds and inspect their quadrature rules."""

import numpy as np

from spheremin.mesh import build_disk_mesh, build_rectangle_mesh, mesh_summary

# a rectangle [0, 2] x [0, 1] on a 40 x 20 grid
rect = build_rectangle_mesh(40, 20, 2.0, 1.0)
print("rectangle:", mesh_summary(rect))
print("  area weights sum to  %.15f  (exact 2)" % rect.area_weights.sum())
print("  arc weights sum to   %.15f  (exact 6)" % rect.arc_weights.sum())

# a unit disk in polar coordinates, 24 rings x 48 spokes plus the center node
disk = build_disk_mesh(24, 48, 1.0)
print("disk:", mesh_summary(disk))
print("  area weights sum to  %.15f  (exact pi = %.15f)"
      % (disk.area_weights.sum(), np.pi))
print("  arc weights sum to   %.15f  (exact 2 pi)" % disk.arc_weights.sum())

# outward normals on the disk rim point along the position vector
rim = disk.nodes[disk.boundary]
tilt = np.abs(np.sum(disk.normals[disk.boundary] * rim, axis=1) - 1.0).max()
print("  worst normal tilt on the rim: %.2e" % tilt)

# the stiffness matrix integrates |grad f|^2; test it on f = x^2 + y^2,
# whose Dirichlet energy over the unit disk is int |2x, 2y|^2 = 2 pi
f = disk.nodes[:, 0] ** 2 + disk.nodes[:, 1] ** 2
quad = float(f @ (disk.stiffness @ f))
print("  quadratic Dirichlet energy: %.10f  (exact 2 pi = %.10f)"
      % (quad, 2 * np.pi))

# quadrature error decays with refinement
print("refinement of the f = r^2 energy error:")
for nr in (12, 24, 48, 96):
    m = build_disk_mesh(nr, 2 * nr, 1.0)
    g = m.nodes[:, 0] ** 2 + m.nodes[:, 1] ** 2
    err = abs(float(g @ (m.stiffness @ g)) - 2 * np.pi)
    print("  nr = %3d   error = %.3e" % (nr, err))
