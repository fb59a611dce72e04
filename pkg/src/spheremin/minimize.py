"""Projected gradient descent for the penalized energy.

The sphere-field solver walks on the product of unit spheres: the descent
direction is the Sobolev (H^1) gradient -- the solution d of

    (M + 2K + 2 gamma^-2 A) d = grad E,

with M the lumped mass, K the stiffness and A the boundary-arc mass matrix
-- projected onto the tangent planes, scaled by a Barzilai-Borwein trial
step, safeguarded by monotone Armijo backtracking, and followed by
nodewise renormalization.  Every accepted step strictly decreases the
energy, so the recorded trace is non-increasing by construction.

The metric matters: with the plain L^2 (inverse-mass) gradient, Armijo
caps the stable step at the square of the smallest mesh spacing, which on
a polar mesh is the angular cell r_1*dtheta at the first ring -- about
2e-6 on a 48x96 disk, thousands of times too slow to converge.  The
Sobolev solve absorbs that stiffness; its factorization is computed once
per solve and reused every iteration.

gamma = 0 runs in hard-data mode: boundary nodes are pinned to +e3 (phase
pinned to 0), excluded from updates, and the preconditioner is factorized
on the interior block.

The scalar phase solver shares the same loop on (n,) arrays without the
renormalization step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import (
    AxisSymmetry,
    EnergyBreakdown,
    Params,
    check_sphere_field,
    el_residual,
    energy_phase,
    energy_sphere_field,
    phase_gradient,
    sphere_gradient,
)
from .mesh import Mesh, lumped_weights

INIT_KINDS = ("constant-e3", "constant-inplane", "random-uniform-S2",
              "radial-seed", "file")

_E3 = np.array([0.0, 0.0, 1.0])


class StagnationError(RuntimeError):
    """Raised when backtracking underflows without an energy decrease."""


@dataclass
class SolveOptions:
    """Knobs for the descent loop.

    gradient_tolerance is relative to the initial projected-gradient norm;
    tolerance_floor is the absolute floor of the resulting threshold.
    init_kind selects the starting field; "file" reads init_file (binary
    field dump for sphere solves, .npy array for phase solves).  Random
    inits are smooth global modes, not per-node noise (see
    _random_smooth_field for why).
    """

    max_iterations: int = 20000
    gradient_tolerance: float = 1e-8
    tolerance_floor: float = 1e-10
    initial_step: float = 1.0
    backtracking: float = 0.5
    armijo: float = 1e-4
    rng_seed: int = 0
    init_kind: str = "random-uniform-S2"
    init_file: str | None = None

    def validate(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.gradient_tolerance > 0.0:
            raise ValueError("gradient_tolerance must be positive")
        if not self.tolerance_floor > 0.0:
            raise ValueError("tolerance_floor must be positive")
        if not self.initial_step > 0.0:
            raise ValueError("initial_step must be positive")
        if not 0.0 < self.backtracking < 1.0:
            raise ValueError("backtracking factor must lie in (0, 1)")
        if not 0.0 < self.armijo < 1.0:
            raise ValueError("armijo constant must lie in (0, 1)")
        kind = self.init_kind
        if kind == "random-uniform-sphere":   # accepted alias
            kind = "random-uniform-S2"
        if kind not in INIT_KINDS:
            raise ValueError(f"unknown init_kind {self.init_kind!r}; "
                             f"expected one of {INIT_KINDS}")
        if kind == "file" and not self.init_file:
            raise ValueError("init_kind 'file' requires init_file")


@dataclass
class SolveReport:
    """Outcome of one descent run."""

    iterations: int
    converged: bool
    classification: str
    energy: EnergyBreakdown
    gradient_norm: float
    energy_trace: np.ndarray
    interior_residual: float
    boundary_residual: float
    init_kind: str = ""
    rng_seed: int = 0

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "classification": self.classification,
            "energy": self.energy.to_dict(),
            "gradient_norm": self.gradient_norm,
            "energy_trace": [float(e) for e in self.energy_trace],
            "interior_residual": self.interior_residual,
            "boundary_residual": self.boundary_residual,
            "init_kind": self.init_kind,
            "rng_seed": self.rng_seed,
        }


def _normalize_rows(field: np.ndarray) -> np.ndarray:
    return field / np.linalg.norm(field, axis=1)[:, None]


def _sobolev_solver(mesh: Mesh, params: Params):
    """Factorized H^1 preconditioner; returns a solve(right-hand side) map.

    gamma = 0 factorizes the interior block (boundary rows stay zero, the
    hard-data nodes never move); gamma > 0 includes the Robin term's own
    stiffness 2 gamma^-2 A so the rim responds on the same footing as the
    bulk.
    """
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    weight = lumped_weights(mesh)
    op = sp.diags(weight) + 2.0 * mesh.stiffness
    if params.gamma > 0.0:
        op = op + sp.diags(2.0 / params.gamma ** 2 * mesh.arc_weights)
        solve = spla.factorized(op.tocsc())
        return lambda rhs: solve(rhs)
    interior = mesh.interior
    block = spla.factorized(op.tocsr()[interior][:, interior].tocsc())

    def dirichlet_solve(rhs):
        out = np.zeros_like(rhs)
        out[interior] = block(rhs[interior])
        return out

    return dirichlet_solve


def _sphere_total(mesh: Mesh, field: np.ndarray, params: Params) -> float:
    total = float(np.sum(field * (mesh.stiffness @ field)))
    total += params.kappa ** 2 * float(mesh.area_weights @ (field[:, 2] ** 2))
    if params.gamma > 0.0:
        inplane2 = field[:, 0] ** 2 + field[:, 1] ** 2
        total += float(mesh.arc_weights @ inplane2) / params.gamma ** 2
    return total


def _phase_total(mesh: Mesh, phase: np.ndarray, params: Params) -> float:
    total = float(phase @ (mesh.stiffness @ phase))
    total += params.kappa ** 2 * float(mesh.area_weights @ (np.cos(phase) ** 2))
    if params.gamma > 0.0:
        total += float(mesh.arc_weights @ (np.sin(phase) ** 2)) / params.gamma ** 2
    return total


def classify_field(field: np.ndarray, converged: bool) -> str:
    """Label by the out-of-plane component: min |m3| >= 0.999 is constant-e3,
    max |m3| <= 1e-3 is constant-inplane, anything else nonconstant."""
    if not converged:
        return "non-converged"
    m3 = np.abs(field[:, 2])
    if np.min(m3) >= 0.999:
        return "constant-e3"
    if np.max(m3) <= 1e-3:
        return "constant-inplane"
    return "nonconstant"


def _radial_seed_values(mesh: Mesh, params: Params):
    from .radial import solve_radial_bvp

    if mesh.kind == "disk-polar":
        radius = mesh.extent[0]
        center = np.zeros(2)
    else:
        lx, ly = mesh.extent
        radius = 0.5 * min(lx, ly)
        center = np.array([lx / 2.0, ly / 2.0])
    profile = solve_radial_bvp(params, radius, 2)
    r = np.linalg.norm(mesh.nodes - center, axis=1)
    u = np.interp(np.clip(r, 0.0, radius), profile.r, profile.u)
    return u / 2.0


def _smooth_modes(mesh: Mesh) -> np.ndarray:
    """Low-order polynomial modes on centered, diameter-scaled coordinates.

    Columns are bounded by 1 in absolute value on the mesh, so random
    combinations have a controlled amplitude.
    """
    nodes = mesh.nodes
    center = 0.5 * (nodes.min(axis=0) + nodes.max(axis=0))
    half = 0.5 * float(np.max(nodes.max(axis=0) - nodes.min(axis=0)))
    xi = (nodes[:, 0] - center[0]) / half
    eta = (nodes[:, 1] - center[1]) / half
    return np.column_stack([xi, eta, xi * eta,
                            xi ** 2 - eta ** 2, xi ** 2 + eta ** 2 - 1.0])


def _random_smooth_field(mesh: Mesh, rng: np.random.Generator) -> np.ndarray:
    """Random unit field: uniform base direction, smooth tangent modulation.

    Per-node i.i.d. sampling seeds the descent with a dense gas of
    lattice-scale defects and with rim windings whose annealing the
    descent cannot perform (they are protected by integer invariants), so
    randomness is put into a handful of global smooth modes instead.  The
    geodesic step keeps the image inside a ball of radius < pi around the
    base point, which makes the start topologically trivial while leaving
    the base direction uniform on the sphere.
    """
    base = rng.normal(size=3)
    base /= np.linalg.norm(base)
    modes = _smooth_modes(mesh)
    coeff = rng.normal(scale=0.6, size=(modes.shape[1], 3))
    tangent = modes @ coeff
    tangent -= np.outer(tangent @ base, base)
    theta = np.linalg.norm(tangent, axis=1)
    cap = 2.5
    top = float(np.max(theta))
    if top > cap:
        tangent *= cap / top
        theta *= cap / top
    direction = np.divide(tangent, theta[:, None],
                          out=np.zeros_like(tangent), where=theta[:, None] > 0)
    return np.cos(theta)[:, None] * base + np.sin(theta)[:, None] * direction


def _random_smooth_phase(mesh: Mesh, rng: np.random.Generator) -> np.ndarray:
    """Random phase in [0, pi/2]: uniform level, smooth modulation."""
    level = rng.uniform(0.0, np.pi / 2.0)
    modes = _smooth_modes(mesh)
    coeff = rng.normal(scale=0.25, size=modes.shape[1])
    return np.clip(level + modes @ coeff, 0.0, np.pi / 2.0)


def _initial_field(mesh: Mesh, params: Params, opts: SolveOptions,
                   rng: np.random.Generator) -> np.ndarray:
    kind = opts.init_kind
    if kind == "random-uniform-sphere":
        kind = "random-uniform-S2"
    n = mesh.n_nodes
    if kind == "constant-e3":
        return np.tile(_E3, (n, 1))
    if kind == "constant-inplane":
        alpha = rng.uniform(0.0, 2.0 * np.pi)
        return np.tile([np.cos(alpha), np.sin(alpha), 0.0], (n, 1))
    if kind == "random-uniform-S2":
        return _random_smooth_field(mesh, rng)
    if kind == "radial-seed":
        phi = _radial_seed_values(mesh, params)
        return np.column_stack([np.sin(phi), np.zeros(n), np.cos(phi)])
    from .io import read_field_bin

    field = read_field_bin(opts.init_file)
    return check_sphere_field(mesh, field)


def _initial_phase(mesh: Mesh, params: Params, opts: SolveOptions,
                   rng: np.random.Generator) -> np.ndarray:
    kind = opts.init_kind
    if kind == "random-uniform-sphere":
        kind = "random-uniform-S2"
    n = mesh.n_nodes
    if kind == "constant-e3":
        return np.zeros(n)
    if kind == "constant-inplane":
        return np.full(n, np.pi / 2.0)
    if kind == "random-uniform-S2":
        return _random_smooth_phase(mesh, rng)
    if kind == "radial-seed":
        return _radial_seed_values(mesh, params)
    phase = np.load(opts.init_file)
    return np.asarray(phase, dtype=float).reshape(n)


def _descend(x, total_fn, grad_fn, direction_fn, project_fn, retract_fn,
             weight, opts):
    """Shared monotone BB-Armijo loop.

    project_fn(g, x) restricts the raw gradient to the admissible directions
    (tangent plane, free Dirichlet rows); the stopping test is the
    area-weighted L2 norm of that projected gradient.  direction_fn(gt, x)
    turns it into the preconditioned step direction.  If the preconditioner
    loses descent (possible once the tangent projection cuts into the
    cross-node Sobolev solve), the iteration falls back to the diagonally
    scaled projected gradient, whose slope vanishes only at stationary
    points.

    Accepted steps strictly decrease the energy.  Once the Armijo margin
    armijo*t*slope falls below the rounding noise of the energy itself and
    the candidate energy sits inside that noise band, no strictly smaller
    representable energy can be certified along the ray; that is convergence
    to machine precision, reported at whatever projected gradient norm the
    floor corresponds to.  Returns (x, iterations, converged, pgnorm, trace).
    """
    energy = total_fn(x)
    trace = [energy]
    grad = grad_fn(x)
    tol = None
    prev_x = prev_g = None
    t_accepted = opts.initial_step
    iterations = 0
    converged = False
    pgnorm = 0.0
    for _ in range(opts.max_iterations):
        gt = project_fn(grad, x)
        pgnorm = float(np.sqrt(np.sum(weight * gt * gt)
                               if gt.ndim == 1
                               else np.sum(weight[:, None] * gt * gt)))
        if tol is None:
            tol = max(opts.gradient_tolerance * pgnorm, opts.tolerance_floor)
        if pgnorm <= tol:
            converged = True
            break
        d = direction_fn(gt, x)
        slope = float(np.sum(grad * d))
        if slope <= 0.0:
            d = gt / (weight[:, None] if gt.ndim == 2 else weight)
            slope = float(np.sum(grad * d))
            if slope <= 0.0:
                converged = True
                break
        if prev_x is not None:
            s = (x - prev_x).ravel()
            y = (grad - prev_g).ravel()
            sy = float(s @ y)
            t = float(s @ s) / sy if sy > 0.0 else 2.0 * t_accepted
            t = min(max(t, 1e-12), 1e8)
        else:
            t = opts.initial_step
        t_first = t
        floor = 100.0 * np.finfo(float).eps * (1.0 + abs(energy))
        while True:
            candidate = retract_fn(x - t * d)
            cand_energy = total_fn(candidate)
            if (cand_energy < energy
                    and cand_energy <= energy - opts.armijo * t * slope):
                break
            if (opts.armijo * t * slope <= floor
                    and cand_energy <= energy + floor):
                converged = True
                break
            t *= opts.backtracking
            if t < 1e-16 * t_first:
                raise StagnationError(
                    f"line search underflow at iteration {iterations} "
                    f"(projected gradient norm {pgnorm:.3e})")
        if converged:
            break
        prev_x, prev_g = x, grad
        x, energy, t_accepted = candidate, cand_energy, t
        grad = grad_fn(x)
        trace.append(energy)
        iterations += 1
    return x, iterations, converged, pgnorm, np.asarray(trace)


def minimize_sphere_field(mesh: Mesh, params: Params,
                          options: SolveOptions | None = None):
    """Minimize the penalized energy over unit fields; returns (field, report)."""
    opts = options if options is not None else SolveOptions()
    opts.validate()
    rng = np.random.default_rng(opts.rng_seed)
    m = _initial_field(mesh, params, opts, rng)
    dirichlet = params.gamma == 0.0
    if dirichlet:
        m = m.copy()
        m[mesh.boundary] = _E3
    weight = lumped_weights(mesh)
    solve = _sobolev_solver(mesh, params)

    def tangent(values, x):
        return values - np.sum(values * x, axis=1)[:, None] * x

    def project(grad, x):
        gt = tangent(grad, x)
        if dirichlet:
            gt[mesh.boundary] = 0.0
        return gt

    def direction(gt, x):
        d = tangent(solve(gt), x)
        if dirichlet:
            d[mesh.boundary] = 0.0
        return d

    def retract(x):
        out = _normalize_rows(x)
        if dirichlet:
            out[mesh.boundary] = _E3
        return out

    m, iterations, converged, pgnorm, trace = _descend(
        m, lambda x: _sphere_total(mesh, x, params),
        lambda x: sphere_gradient(mesh, x, params),
        direction, project, retract, weight, opts)

    interior_res, boundary_res = el_residual(mesh, m, params)
    report = SolveReport(
        iterations=iterations, converged=converged,
        classification=classify_field(m, converged),
        energy=energy_sphere_field(mesh, m, params),
        gradient_norm=pgnorm, energy_trace=trace,
        interior_residual=interior_res, boundary_residual=boundary_res,
        init_kind=opts.init_kind, rng_seed=opts.rng_seed)
    return m, report


def minimize_phase(mesh: Mesh, params: Params,
                   options: SolveOptions | None = None):
    """Minimize the scalar phase energy; returns (phase, report)."""
    opts = options if options is not None else SolveOptions()
    opts.validate()
    rng = np.random.default_rng(opts.rng_seed)
    phase = _initial_phase(mesh, params, opts, rng)
    dirichlet = params.gamma == 0.0
    if dirichlet:
        phase = phase.copy()
        phase[mesh.boundary] = 0.0
    weight = lumped_weights(mesh)
    solve = _sobolev_solver(mesh, params)

    def project(grad, x):
        if dirichlet:
            grad = grad.copy()
            grad[mesh.boundary] = 0.0
        return grad

    def direction(gt, x):
        d = solve(gt)
        if dirichlet:
            d[mesh.boundary] = 0.0
        return d

    phase, iterations, converged, pgnorm, trace = _descend(
        phase, lambda x: _phase_total(mesh, x, params),
        lambda x: phase_gradient(mesh, x, params),
        direction, project, lambda x: x, weight, opts)

    k2 = params.kappa ** 2
    res = mesh.laplacian @ (2.0 * phase) + k2 * np.sin(2.0 * phase)
    ii = mesh.interior
    interior_res = float(np.sqrt(mesh.area_weights[ii] @ (res[ii] ** 2)))
    bb = mesh.boundary
    if dirichlet:
        rb = np.sin(phase)
    else:
        rb = (mesh.normal_derivative @ phase
              + np.sin(2.0 * phase) / (2.0 * params.gamma ** 2))
    boundary_res = float(np.sqrt(mesh.arc_weights[bb] @ (rb[bb] ** 2)))

    m3 = np.cos(phase)
    pseudo = np.column_stack([np.sin(phase), np.zeros_like(phase), m3])
    report = SolveReport(
        iterations=iterations, converged=converged,
        classification=classify_field(pseudo, converged),
        energy=energy_phase(mesh, phase, params),
        gradient_norm=pgnorm, energy_trace=trace,
        interior_residual=interior_res, boundary_residual=boundary_res,
        init_kind=opts.init_kind, rng_seed=opts.rng_seed)
    return phase, report


def canonicalize(mesh: Mesh, field: np.ndarray):
    """Fix the symmetry gauge of a field.

    Output satisfies: area-weighted mean of m3 is >= 0, and the mean
    in-plane vector points along +e1 (no rotation applied if its length is
    below 1e-12).  Returns (canonical field, the symmetry that was applied).
    """
    field = check_sphere_field(mesh, field)
    w = mesh.area_weights
    flip = bool(w @ field[:, 2] < 0.0)
    work = field.copy()
    if flip:
        work[:, 2] = -work[:, 2]
    p1 = float(w @ work[:, 0])
    p2 = float(w @ work[:, 1])
    if np.hypot(p1, p2) >= 1e-12:
        angle = -float(np.arctan2(p2, p1))
    else:
        angle = 0.0
    sigma = AxisSymmetry(angle=angle, flip_z=flip)
    c, s = np.cos(angle), np.sin(angle)
    out = np.empty_like(work)
    out[:, 0] = c * work[:, 0] - s * work[:, 1]
    out[:, 1] = s * work[:, 0] + c * work[:, 1]
    out[:, 2] = work[:, 2]
    return out, sigma


def stability_gap(mesh: Mesh, base: np.ndarray, other: np.ndarray,
                  params: Params) -> float:
    """Slack in the second-variation lower bound around a minimizer.

    For unit fields with identical boundary values and base m1 > 0 at all
    interior nodes, returns

        [E(other) - E(base)] - [int m1^2 |grad(v/m1)|^2 + kappa^2 int v3^2]

    with v = other - base and E the Dirichlet + anisotropy part.  For an
    exact minimizer the bracket difference is nonnegative (zero to leading
    order), so values should sit above a small negative discretization tol.

    Where m1 vanishes (hard-data boundary nodes), the quotient v/m1 is
    filled with the ratio of outward normal derivatives; the integrand's
    m1^2 factor vanishes there, so the fill only feeds the neighboring
    interior stencils.
    """
    base = check_sphere_field(mesh, base)
    other = check_sphere_field(mesh, other)
    bb = mesh.boundary
    if float(np.max(np.abs(other[bb] - base[bb]))) > 1e-10:
        raise ValueError("base and other must share boundary values")
    m1 = base[:, 0]
    if float(np.min(m1[mesh.interior])) <= 0.0:
        raise ValueError("base must have m1 > 0 at all interior nodes")
    v = other - base

    def bulk_energy(f):
        k2 = params.kappa ** 2
        return (float(np.sum(f * (mesh.stiffness @ f)))
                + k2 * float(mesh.area_weights @ (f[:, 2] ** 2)))

    delta_e = bulk_energy(other) - bulk_energy(base)

    q = np.zeros_like(v)
    safe = m1 > 1e-12
    q[safe] = v[safe] / m1[safe, None]
    if not np.all(safe):
        dn_v = mesh.normal_derivative @ v
        dn_m1 = mesh.normal_derivative @ m1
        rows = np.nonzero(~safe)[0]
        denom = dn_m1[rows]
        ok = np.abs(denom) > 1e-12
        q[rows[ok]] = dn_v[rows[ok]] / denom[ok, None]

    g1 = mesh.d1 @ q
    g2 = mesh.d2 @ q
    density = m1 ** 2 * np.sum(g1 * g1 + g2 * g2, axis=1)
    bound = (float(mesh.area_weights @ density)
             + params.kappa ** 2 * float(mesh.area_weights @ (v[:, 2] ** 2)))
    return float(delta_e - bound)
