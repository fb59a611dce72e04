"""Structured finite-difference meshes on rectangles and disks.

A mesh bundles node coordinates, trapezoidal quadrature weights (area and
boundary arc), outward unit normals, and sparse first-derivative operators.
All downstream energies, residuals, and eigenvalue estimates are built from
the operators stored here, so the whole package shares one discrete H1 norm.

Conventions:

- Rectangle [0, lx] x [0, ly]: tensor grid with nx * ny cells, node (i, j)
  at (i*hx, j*hy), flat index j*(nx+1) + i.  First derivatives are central
  at interior nodes and one-sided second order at the two ends.
- Disk of radius R: polar grid with a single shared center node (index 0)
  and rings r_i = i*dr, i = 1..nr, each carrying ntheta equispaced angles;
  flat index 1 + (i-1)*ntheta + j.  The gradient is stored in the polar
  frame (d_r, (1/r) d_theta); both rows vanish at the center, whose area
  weight is exactly zero under the trapezoidal rule in r (the center enters
  the energy only through the ring-1 radial stencils).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class Mesh:
    """Immutable mesh descriptor with quadrature and derivative operators.

    Attributes:
        kind: "rectangle" or "disk-polar".
        nodes: (n, 2) Cartesian node coordinates.
        interior: indices of nodes not on the boundary.
        boundary: indices of boundary nodes.
        area_weights: (n,) trapezoidal area weights; sums to the exact area.
        arc_weights: (n,) boundary arc weights, zero off the boundary; sums
            to the exact perimeter.
        normals: (n, 2) outward unit normals on boundary rows, zero rows
            elsewhere.
        spacing: (hx, hy) for rectangles, (dr, dtheta) for disks.
        extent: (lx, ly) for rectangles, (R,) for disks.
        shape: (nx, ny) cell counts for rectangles, (nr, ntheta) for disks.
        d1: sparse first-derivative operator, d/dx or d/dr.
        d2: sparse first-derivative operator, d/dy or (1/r) d/dtheta.
        stiffness: d1^T W d1 + d2^T W d2 with W = diag(area_weights); the
            discrete Dirichlet quadratic form.
        laplacian: strong-form Laplacian, nonzero rows at interior nodes only.
        normal_derivative: outward normal derivative, nonzero rows at
            boundary nodes only (one-sided second order).
    """

    kind: str
    nodes: np.ndarray
    interior: np.ndarray
    boundary: np.ndarray
    area_weights: np.ndarray
    arc_weights: np.ndarray
    normals: np.ndarray
    spacing: tuple
    extent: tuple
    shape: tuple
    d1: sp.csr_matrix
    d2: sp.csr_matrix
    stiffness: sp.csr_matrix
    laplacian: sp.csr_matrix
    normal_derivative: sp.csr_matrix

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


def _finish(kind, nodes, interior, boundary, area_w, arc_w, normals,
            spacing, extent, shape, d1, d2, lap, dn) -> Mesh:
    w = sp.diags(area_w)
    stiff = (d1.T @ w @ d1 + d2.T @ w @ d2).tocsr()
    _freeze(nodes, interior, boundary, area_w, arc_w, normals)
    return Mesh(kind=kind, nodes=nodes, interior=interior, boundary=boundary,
                area_weights=area_w, arc_weights=arc_w, normals=normals,
                spacing=spacing, extent=extent, shape=shape,
                d1=d1.tocsr(), d2=d2.tocsr(), stiffness=stiff,
                laplacian=lap.tocsr(), normal_derivative=dn.tocsr())


def _onesided_rows(rows, cols_near, cols_mid, cols_far, h, sign, triplets):
    # second-order one-sided stencil sign*(-3 f0 + 4 f1 - f2)/(2h)
    for r, c0, c1, c2 in zip(rows, cols_near, cols_mid, cols_far):
        triplets.append((r, c0, sign * -3.0 / (2.0 * h)))
        triplets.append((r, c1, sign * 4.0 / (2.0 * h)))
        triplets.append((r, c2, sign * -1.0 / (2.0 * h)))


def build_rectangle_mesh(nx: int, ny: int, lx: float, ly: float) -> Mesh:
    """Tensor-product mesh on [0, lx] x [0, ly] with nx * ny cells.

    Requires nx, ny >= 3 (the one-sided stencils need three distinct nodes
    per direction) and positive side lengths.
    """
    if nx < 3 or ny < 3:
        raise ValueError(f"need nx, ny >= 3, got ({nx}, {ny})")
    if not (lx > 0.0 and ly > 0.0):
        raise ValueError(f"side lengths must be positive, got ({lx}, {ly})")
    hx, hy = lx / nx, ly / ny
    xs = np.arange(nx + 1) * hx
    ys = np.arange(ny + 1) * hy
    ii, jj = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="xy")
    ii, jj = ii.ravel(), jj.ravel()            # flat index = j*(nx+1) + i
    nodes = np.column_stack([xs[ii], ys[jj]]).astype(float)
    n = nodes.shape[0]

    def idx(i, j):
        return j * (nx + 1) + i

    on_bnd = (ii == 0) | (ii == nx) | (jj == 0) | (jj == ny)
    boundary = np.nonzero(on_bnd)[0]
    interior = np.nonzero(~on_bnd)[0]

    wx = np.full(nx + 1, hx)
    wx[[0, -1]] = hx / 2.0
    wy = np.full(ny + 1, hy)
    wy[[0, -1]] = hy / 2.0
    area_w = wx[ii] * wy[jj]

    # trapezoid rule along each of the four edges; corners sit on two edges
    # and collect half a cell from each
    arc_w = np.zeros(n)
    for fixed, h_along, along, n_along in ((jj == 0, hx, ii, nx),
                                           (jj == ny, hx, ii, nx),
                                           (ii == 0, hy, jj, ny),
                                           (ii == nx, hy, jj, ny)):
        wa = np.where((along == 0) | (along == n_along), h_along / 2.0, h_along)
        arc_w[fixed] += wa[fixed]

    normals = np.zeros((n, 2))
    normals[ii == 0, 0] -= 1.0
    normals[ii == nx, 0] += 1.0
    normals[jj == 0, 1] -= 1.0
    normals[jj == ny, 1] += 1.0
    lens = np.linalg.norm(normals, axis=1)
    nz = lens > 0
    normals[nz] /= lens[nz, None]

    def deriv_1d(n_cells, h, stride, other_count, other_stride):
        trip = []
        for k in range(other_count):
            base = k * other_stride
            line = base + np.arange(n_cells + 1) * stride
            for m in range(1, n_cells):
                trip.append((line[m], line[m + 1], 1.0 / (2 * h)))
                trip.append((line[m], line[m - 1], -1.0 / (2 * h)))
            _onesided_rows([line[0]], [line[0]], [line[1]], [line[2]],
                           h, 1.0, trip)
            _onesided_rows([line[-1]], [line[-1]], [line[-2]], [line[-3]],
                           h, -1.0, trip)
        return trip

    def to_csr(trip):
        r, c, v = zip(*trip)
        return sp.coo_matrix((v, (r, c)), shape=(n, n)).tocsr()

    dx = to_csr(deriv_1d(nx, hx, 1, ny + 1, nx + 1))
    dy = to_csr(deriv_1d(ny, hy, nx + 1, nx + 1, 1))

    trip = []
    for j in range(1, ny):
        for i in range(1, nx):
            c = idx(i, j)
            trip.append((c, idx(i - 1, j), 1.0 / hx**2))
            trip.append((c, idx(i + 1, j), 1.0 / hx**2))
            trip.append((c, idx(i, j - 1), 1.0 / hy**2))
            trip.append((c, idx(i, j + 1), 1.0 / hy**2))
            trip.append((c, c, -2.0 / hx**2 - 2.0 / hy**2))
    lap = to_csr(trip)

    dn = (sp.diags(normals[:, 0]) @ dx + sp.diags(normals[:, 1]) @ dy)

    return _finish("rectangle", nodes, interior, boundary, area_w, arc_w,
                   normals, (hx, hy), (lx, ly), (nx, ny), dx, dy, lap, dn)


def build_disk_mesh(nr: int, ntheta: int, radius: float) -> Mesh:
    """Polar mesh on the disk of the given radius.

    Requires nr >= 3, ntheta >= 8 and even (even counts keep the grid closed
    under the reflection theta -> -theta), radius > 0.
    """
    if nr < 3:
        raise ValueError(f"need nr >= 3, got {nr}")
    if ntheta < 8 or ntheta % 2 != 0:
        raise ValueError(f"need even ntheta >= 8, got {ntheta}")
    if not radius > 0.0:
        raise ValueError(f"radius must be positive, got {radius}")
    dr = radius / nr
    dtheta = 2.0 * np.pi / ntheta
    thetas = np.arange(ntheta) * dtheta
    n = 1 + nr * ntheta

    def idx(i, j):
        return 1 + (i - 1) * ntheta + (j % ntheta)

    rings = np.concatenate([[0], np.repeat(np.arange(1, nr + 1), ntheta)])
    ang = np.concatenate([[0.0], np.tile(thetas, nr)])
    rr = rings * dr
    nodes = np.column_stack([rr * np.cos(ang), rr * np.sin(ang)])
    nodes[0] = 0.0

    boundary = np.nonzero(rings == nr)[0]
    interior = np.nonzero(rings < nr)[0]

    area_w = rr * dr * dtheta
    area_w[rings == nr] /= 2.0      # half cell at the rim (r_0 = 0 already)

    arc_w = np.zeros(n)
    arc_w[boundary] = radius * dtheta

    normals = np.zeros((n, 2))
    normals[boundary, 0] = np.cos(ang[boundary])
    normals[boundary, 1] = np.sin(ang[boundary])

    trip_r, trip_t, trip_l = [], [], []
    for j in range(ntheta):
        # d/dr along the ray: ring 1 reaches through the center
        trip_r.append((idx(1, j), idx(2, j), 1.0 / (2 * dr)))
        trip_r.append((idx(1, j), 0, -1.0 / (2 * dr)))
        for i in range(2, nr):
            trip_r.append((idx(i, j), idx(i + 1, j), 1.0 / (2 * dr)))
            trip_r.append((idx(i, j), idx(i - 1, j), -1.0 / (2 * dr)))
        _onesided_rows([idx(nr, j)], [idx(nr, j)], [idx(nr - 1, j)],
                       [idx(nr - 2, j)], dr, -1.0, trip_r)
        for i in range(1, nr + 1):
            c = 1.0 / (2 * dtheta * i * dr)
            trip_t.append((idx(i, j), idx(i, j + 1), c))
            trip_t.append((idx(i, j), idx(i, j - 1), -c))
        # strong Laplacian f_rr + f_r/r + f_tt/r^2 at interior rings
        for i in range(1, nr):
            c = idx(i, j)
            below = 0 if i == 1 else idx(i - 1, j)
            ri = i * dr
            trip_l.append((c, idx(i + 1, j), 1.0 / dr**2 + 1.0 / (2 * dr * ri)))
            trip_l.append((c, below, 1.0 / dr**2 - 1.0 / (2 * dr * ri)))
            trip_l.append((c, c, -2.0 / dr**2 - 2.0 / (dtheta * ri)**2))
            trip_l.append((c, idx(i, j + 1), 1.0 / (dtheta * ri)**2))
            trip_l.append((c, idx(i, j - 1), 1.0 / (dtheta * ri)**2))
    # polar-origin closure: Delta f(0) ~ 4 (ring-1 mean - f(0)) / dr^2
    trip_l.append((0, 0, -4.0 / dr**2))
    for j in range(ntheta):
        trip_l.append((0, idx(1, j), 4.0 / (dr**2 * ntheta)))

    def to_csr(trip):
        r, c, v = zip(*trip)
        return sp.coo_matrix((v, (r, c)), shape=(n, n)).tocsr()

    d_r, d_t, lap = to_csr(trip_r), to_csr(trip_t), to_csr(trip_l)
    dn = sp.diags((rings == nr).astype(float)) @ d_r

    return _finish("disk-polar", nodes, interior, boundary, area_w, arc_w,
                   normals, (dr, dtheta), (radius,), (nr, ntheta),
                   d_r, d_t, lap, dn)


def mesh_diameter(mesh: Mesh) -> float:
    """Analytic diameter of the meshed domain (not of the node cloud)."""
    if mesh.kind == "disk-polar":
        return 2.0 * mesh.extent[0]
    lx, ly = mesh.extent
    return float(np.hypot(lx, ly))


def integrate(mesh: Mesh, values: np.ndarray) -> float:
    """Area quadrature of nodal values (pairwise summation via np.dot/sum)."""
    return float(mesh.area_weights @ np.asarray(values, dtype=float))


def boundary_integrate(mesh: Mesh, values: np.ndarray) -> float:
    """Boundary arc quadrature of nodal values."""
    return float(mesh.arc_weights @ np.asarray(values, dtype=float))


def lumped_weights(mesh: Mesh) -> np.ndarray:
    """Strictly positive per-node weights for diagonal preconditioning.

    Equals the area weights except at nodes whose trapezoidal weight is zero
    (the disk center), which get the synthetic lumped value pi*(dr/2)^2.
    """
    w = mesh.area_weights.copy()
    if mesh.kind == "disk-polar":
        dr = mesh.spacing[0]
        w[w == 0.0] = np.pi * (dr / 2.0) ** 2
    return w


def mesh_summary(mesh: Mesh) -> dict:
    """JSON-ready summary: kind, counts, exact area/perimeter sums, spacing."""
    return {
        "kind": mesh.kind,
        "nodes": int(mesh.n_nodes),
        "interior_nodes": int(mesh.interior.size),
        "boundary_nodes": int(mesh.boundary.size),
        "area": float(np.sum(mesh.area_weights)),
        "perimeter": float(np.sum(mesh.arc_weights)),
        "diameter": mesh_diameter(mesh),
        "spacing": [float(s) for s in mesh.spacing],
        "extent": [float(e) for e in mesh.extent],
        "shape": [int(s) for s in mesh.shape],
    }
