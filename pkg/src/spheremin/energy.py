"""Energy evaluation for sphere-valued fields and their meridian phases.

Two equivalent views of the same functional are supported:

- full fields m : nodes -> S^2 stored as (n, 3) arrays,
      E(m) = int |grad m|^2 + kappa^2 int (m.e3)^2
           + (1/gamma^2) int_bnd (m1^2 + m2^2);
- scalar phases psi (the meridian angle from e3), stored as (n,) arrays,
      E(psi) = int |grad psi|^2 + kappa^2 int cos^2 psi
             + (1/gamma^2) int_bnd sin^2 psi.

gamma = 0 means hard boundary data m = +/-e3 (phase at a multiple of pi);
evaluation then checks the data and drops the boundary term.  Gradients of
the discrete energies are exact (the Dirichlet part is a quadratic form in
the nodal values), which the minimizer and the residual tests rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh

_UNIT_TOL = 1e-8         # how far nodal values may sit from S^2 on input
_DIRICHLET_TOL = 1e-9    # how exactly gamma = 0 boundary data must hold


@dataclass(frozen=True)
class Params:
    """Model parameters: anisotropy strength kappa, boundary softness gamma.

    kappa >= 0 scales the in-plane anisotropy; gamma > 0 scales the boundary
    penalty, with gamma = 0 meaning hard boundary data +/-e3.
    """

    kappa: float
    gamma: float

    def __post_init__(self):
        if not (np.isfinite(self.kappa) and self.kappa >= 0.0):
            raise ValueError(f"kappa must be finite and >= 0, got {self.kappa}")
        if not (np.isfinite(self.gamma) and self.gamma >= 0.0):
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma}")


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy split into Dirichlet, anisotropy, and boundary terms."""

    dirichlet: float
    anisotropy: float
    boundary: float
    total: float

    def to_dict(self) -> dict:
        return {"dirichlet": self.dirichlet, "anisotropy": self.anisotropy,
                "boundary": self.boundary, "total": self.total}


def _breakdown(dirichlet: float, anisotropy: float, boundary: float) -> EnergyBreakdown:
    return EnergyBreakdown(dirichlet=float(dirichlet), anisotropy=float(anisotropy),
                           boundary=float(boundary),
                           total=float(dirichlet + anisotropy + boundary))


def check_sphere_field(mesh: Mesh, field: np.ndarray) -> np.ndarray:
    """Validate an (n, 3) unit-norm field; returns it as a float array."""
    field = np.asarray(field, dtype=float)
    if field.shape != (mesh.n_nodes, 3):
        raise ValueError(f"field shape {field.shape} does not match mesh "
                         f"({mesh.n_nodes} nodes)")
    if not np.all(np.isfinite(field)):
        raise ValueError("field contains non-finite values")
    norms = np.linalg.norm(field, axis=1)
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > _UNIT_TOL:
        raise ValueError(f"field is not unit-norm (max deviation {worst:.3e})")
    return field


def check_phase_field(mesh: Mesh, phase: np.ndarray) -> np.ndarray:
    phase = np.asarray(phase, dtype=float)
    if phase.shape != (mesh.n_nodes,):
        raise ValueError(f"phase shape {phase.shape} does not match mesh "
                         f"({mesh.n_nodes} nodes)")
    if not np.all(np.isfinite(phase)):
        raise ValueError("phase contains non-finite values")
    return phase


def _require_dirichlet_field(mesh: Mesh, field: np.ndarray) -> None:
    b = field[mesh.boundary]
    plus = np.max(np.linalg.norm(b - np.array([0.0, 0.0, 1.0]), axis=1))
    minus = np.max(np.linalg.norm(b + np.array([0.0, 0.0, 1.0]), axis=1))
    if min(plus, minus) > _DIRICHLET_TOL:
        raise ValueError("gamma = 0 requires the field to equal +e3 or -e3 "
                         f"on every boundary node (deviation {min(plus, minus):.3e})")


def _require_dirichlet_phase(mesh: Mesh, phase: np.ndarray) -> None:
    worst = float(np.max(np.abs(np.sin(phase[mesh.boundary])), initial=0.0))
    if worst > _DIRICHLET_TOL:
        raise ValueError("gamma = 0 requires the phase to sit at a multiple "
                         f"of pi on the boundary (deviation {worst:.3e})")


def _dirichlet_density(mesh: Mesh, values: np.ndarray) -> np.ndarray:
    """Per-node |grad .|^2, summed over components for (n, k) input."""
    g1 = mesh.d1 @ values
    g2 = mesh.d2 @ values
    if values.ndim == 1:
        return g1 * g1 + g2 * g2
    return np.sum(g1 * g1 + g2 * g2, axis=1)


def energy_sphere_field(mesh: Mesh, field: np.ndarray, params: Params) -> EnergyBreakdown:
    """Evaluate the penalized energy of a unit-norm (n, 3) field."""
    field = check_sphere_field(mesh, field)
    w = mesh.area_weights
    dirichlet = w @ _dirichlet_density(mesh, field)
    anisotropy = params.kappa ** 2 * (w @ (field[:, 2] ** 2))
    if params.gamma == 0.0:
        _require_dirichlet_field(mesh, field)
        boundary = 0.0
    else:
        inplane2 = field[:, 0] ** 2 + field[:, 1] ** 2
        boundary = (mesh.arc_weights @ inplane2) / params.gamma ** 2
    return _breakdown(dirichlet, anisotropy, boundary)


def energy_phase(mesh: Mesh, phase: np.ndarray, params: Params,
                 include_boundary: bool = True) -> EnergyBreakdown:
    """Evaluate the phase energy; include_boundary=False drops the boundary
    term entirely (the free-boundary limit)."""
    phase = check_phase_field(mesh, phase)
    w = mesh.area_weights
    dirichlet = w @ _dirichlet_density(mesh, phase)
    anisotropy = params.kappa ** 2 * (w @ (np.cos(phase) ** 2))
    if not include_boundary:
        boundary = 0.0
    elif params.gamma == 0.0:
        _require_dirichlet_phase(mesh, phase)
        boundary = 0.0
    else:
        boundary = (mesh.arc_weights @ (np.sin(phase) ** 2)) / params.gamma ** 2
    return _breakdown(dirichlet, anisotropy, boundary)


def localized_energy_phase(mesh: Mesh, phase: np.ndarray, params: Params,
                           mask: np.ndarray) -> EnergyBreakdown:
    """Phase energy restricted to a node mask.

    Sums exactly the same per-node quadrature terms as energy_phase, so the
    contributions of complementary masks add up to the global value exactly.
    """
    phase = check_phase_field(mesh, phase)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (mesh.n_nodes,):
        raise ValueError(f"mask shape {mask.shape} does not match mesh")
    w = mesh.area_weights * mask
    dirichlet = w @ _dirichlet_density(mesh, phase)
    anisotropy = params.kappa ** 2 * (w @ (np.cos(phase) ** 2))
    if params.gamma == 0.0:
        _require_dirichlet_phase(mesh, phase)
        boundary = 0.0
    else:
        bw = mesh.arc_weights * mask
        boundary = (bw @ (np.sin(phase) ** 2)) / params.gamma ** 2
    return _breakdown(dirichlet, anisotropy, boundary)


def constant_state_energies(mesh: Mesh, params: Params):
    """Energies of the two constant candidates, from analytic area/perimeter.

    Returns (E of +/-e3, E of a constant in-plane state); the second is None
    for gamma = 0, where in-plane states violate the boundary data.
    """
    if mesh.kind == "disk-polar":
        area = np.pi * mesh.extent[0] ** 2
        perimeter = 2.0 * np.pi * mesh.extent[0]
    else:
        lx, ly = mesh.extent
        area = lx * ly
        perimeter = 2.0 * (lx + ly)
    e3 = params.kappa ** 2 * area
    if params.gamma == 0.0:
        return float(e3), None
    return float(e3), float(perimeter / params.gamma ** 2)


def sphere_gradient(mesh: Mesh, field: np.ndarray, params: Params) -> np.ndarray:
    """Exact gradient of the discrete energy with respect to nodal values.

    The returned (n, 3) array is the unconstrained (Euclidean) gradient; the
    minimizer projects it onto the tangent planes.  For gamma = 0 the
    boundary rows are still returned raw; the solver pins those nodes.
    """
    field = np.asarray(field, dtype=float)
    g = 2.0 * (mesh.stiffness @ field)
    g[:, 2] += 2.0 * params.kappa ** 2 * mesh.area_weights * field[:, 2]
    if params.gamma > 0.0:
        scale = 2.0 / params.gamma ** 2
        g[:, 0] += scale * mesh.arc_weights * field[:, 0]
        g[:, 1] += scale * mesh.arc_weights * field[:, 1]
    return g


def phase_gradient(mesh: Mesh, phase: np.ndarray, params: Params) -> np.ndarray:
    """Exact gradient of the discrete phase energy."""
    phase = np.asarray(phase, dtype=float)
    g = 2.0 * (mesh.stiffness @ phase)
    g -= params.kappa ** 2 * mesh.area_weights * np.sin(2.0 * phase)
    if params.gamma > 0.0:
        g += mesh.arc_weights * np.sin(2.0 * phase) / params.gamma ** 2
    return g


def el_residual(mesh: Mesh, field: np.ndarray, params: Params):
    """Strong-form Euler-Lagrange residuals of a unit field.

    Returns (interior, boundary): the area-weighted L2 norm over interior
    nodes of  -Lap m + kappa^2 m3 e3 - (|grad m|^2 + kappa^2 m3^2) m,  and
    the arc-weighted L2 norm over boundary nodes of the natural-condition
    defect  d_n m - (1/gamma^2)(m3 e3 - m3^2 m).  For gamma = 0 the second
    number is instead the boundary L2 distance of m to the closer of +/-e3.
    """
    field = check_sphere_field(mesh, field)
    k2 = params.kappa ** 2
    lam = _dirichlet_density(mesh, field) + k2 * field[:, 2] ** 2
    res = -(mesh.laplacian @ field)
    res[:, 2] += k2 * field[:, 2]
    res -= lam[:, None] * field
    ii = mesh.interior
    interior = float(np.sqrt(mesh.area_weights[ii] @ np.sum(res[ii] ** 2, axis=1)))

    bb = mesh.boundary
    if params.gamma == 0.0:
        e3 = np.array([0.0, 0.0, 1.0])
        best = min(
            float(mesh.arc_weights[bb] @ np.sum((field[bb] - s * e3) ** 2, axis=1))
            for s in (1.0, -1.0))
        return interior, float(np.sqrt(best))
    dn = mesh.normal_derivative @ field
    m3 = field[:, 2]
    rb = dn.copy()
    rb[:, 2] -= m3 / params.gamma ** 2
    rb += (m3 ** 2 / params.gamma ** 2)[:, None] * field
    boundary = float(np.sqrt(mesh.arc_weights[bb] @ np.sum(rb[bb] ** 2, axis=1)))
    return interior, boundary


@dataclass(frozen=True)
class AxisSymmetry:
    """Isometry of R^3 fixing the e3 axis: rotate the plane by angle, then
    optionally reflect e3."""

    angle: float
    flip_z: bool = False

    def matrix(self) -> np.ndarray:
        c, s = np.cos(self.angle), np.sin(self.angle)
        sz = -1.0 if self.flip_z else 1.0
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, sz]])


def _symmetry_matrix(sigma) -> np.ndarray:
    if isinstance(sigma, AxisSymmetry):
        return sigma.matrix()
    mat = np.asarray(sigma, dtype=float)
    if mat.shape != (3, 3):
        raise ValueError(f"symmetry must be AxisSymmetry or a 3x3 matrix, "
                         f"got shape {mat.shape}")
    if np.max(np.abs(mat.T @ mat - np.eye(3))) > 1e-12:
        raise ValueError("symmetry matrix is not orthogonal")
    if abs(abs(mat[2, 2]) - 1.0) > 1e-12 or np.max(np.abs(mat[2, :2])) > 1e-12 \
            or np.max(np.abs(mat[:2, 2])) > 1e-12:
        raise ValueError("symmetry matrix does not preserve the e3 axis")
    return mat


def apply_symmetry(field: np.ndarray, sigma) -> np.ndarray:
    """Apply an e3-axis isometry nodewise to an (n, 3) field."""
    mat = _symmetry_matrix(sigma)
    return np.asarray(field, dtype=float) @ mat.T


def fold_positive(field: np.ndarray, axis: int) -> np.ndarray:
    """Fold one component to its absolute value, (m_axis -> |m_axis|).

    Leaves the sphere constraint intact.  The energy is unchanged whenever
    the folded component has one sign (or vanishes identically), which is
    the situation the structure theory produces.
    """
    if axis not in (0, 1, 2):
        raise ValueError(f"axis must be 0, 1, or 2, got {axis}")
    out = np.array(field, dtype=float, copy=True)
    out[:, axis] = np.abs(out[:, axis])
    return out
