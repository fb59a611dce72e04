"""Executable checks for the structure of minimizers.

Each operation turns one qualitative statement about global minimizers into
a number or a verdict:

- meridian_deviation: how far a field is from the meridian form
  (sin phi, 0, cos phi) after canonicalization;
- sign_consistency: the one-sign-or-identically-zero dichotomy for a fixed
  component;
- radial_deviation: angular variance of a phase on a disk mesh;
- uniqueness_check: largest pairwise distance of a family of fields after
  factoring out the rotations/reflection about e3;
- compare_solutions: the pointwise ordering of two radial phases under
  parameter ordering kappa1 <= kappa2, gamma1 <= gamma2;
- phase_diagram_sweep: classify every (kappa, gamma) cell of a grid by the
  least-energy candidate and overlay the analytic thresholds.

All checks are pure functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .constants import estimate_trace_constant, gamma_threshold
from .energy import Params, check_phase_field, check_sphere_field, \
    constant_state_energies
from .mesh import Mesh, build_disk_mesh, mesh_diameter
from .minimize import SolveOptions, canonicalize, minimize_sphere_field
from .radial import RadialProfile, radial_energy, solve_radial_bvp

_ZERO_TOL = 1e-6        # component treated as identically zero below this
_EQUAL_TOL = 1e-9       # two radial phases treated as the same constant
_STRICT_MARGIN = 1e-9   # "phi1 < phi2" asserted with this much room


def lift_phase(field: np.ndarray) -> np.ndarray:
    """Meridian phase phi = atan2(m1, m3) per node.

    Meaningful for fields already close to the meridian form (m2 ~ 0),
    e.g. canonicalized minimizers; m2 is ignored by construction.
    """
    field = np.asarray(field, dtype=float)
    return np.arctan2(field[:, 0], field[:, 2])


def meridian_deviation(field: np.ndarray, mesh: Mesh) -> float:
    """Weighted share of the in-plane part that sticks out of the meridian
    plane after canonicalization: ||m2||_W / ||(m1, m2)||_W.

    Returns 0 when the in-plane part is below 1e-12 in the weighted norm
    (constant +-e3 fields have no meridian plane to deviate from).
    """
    check_sphere_field(mesh, field)
    m, _ = canonicalize(mesh, field)
    w = mesh.area_weights
    inplane = float(w @ (m[:, 0] ** 2 + m[:, 1] ** 2))
    if np.sqrt(inplane) < 1e-12:
        return 0.0
    return float(np.sqrt((w @ m[:, 1] ** 2) / inplane))


class SignReport(NamedTuple):
    constant_sign: bool
    min_abs: float
    verdict: str    # "positive" | "negative" | "zero" | "mixed"


def sign_consistency(field: np.ndarray, axis: int,
                     mesh: Mesh | None = None) -> SignReport:
    """One-sign-or-zero dichotomy for one component of a unit field.

    With a mesh, only interior nodes are examined (the dichotomy is an
    interior statement; hard boundary data may pin a component to 0 on the
    boundary).  Verdict "zero" means max |component| <= 1e-6; min_abs is
    the smallest |component| examined, or 0 in the mixed case.
    """
    field = np.asarray(field, dtype=float)
    if axis not in (0, 1, 2):
        raise ValueError(f"axis must be 0, 1, or 2, got {axis}")
    comp = field[:, axis]
    if mesh is not None:
        comp = comp[mesh.interior]
    if comp.size == 0:
        raise ValueError("no nodes to examine")
    if np.max(np.abs(comp)) <= _ZERO_TOL:
        return SignReport(True, float(np.min(np.abs(comp))), "zero")
    if np.all(comp > 0.0):
        return SignReport(True, float(np.min(comp)), "positive")
    if np.all(comp < 0.0):
        return SignReport(True, float(np.min(-comp)), "negative")
    return SignReport(False, 0.0, "mixed")


def radial_deviation(mesh: Mesh, phase: np.ndarray) -> float:
    """Root of the area-weighted mean ring variance of a phase on a disk,
    normalized by the overall range; 0 for a constant phase (range < 1e-12).
    """
    if mesh.kind != "disk-polar":
        raise ValueError("radial deviation requires a disk mesh")
    check_phase_field(mesh, phase)
    phase = np.asarray(phase, dtype=float)
    spread = float(np.max(phase) - np.min(phase))
    if spread < 1e-12:
        return 0.0
    nr, ntheta = mesh.shape
    rings = phase[1:].reshape(nr, ntheta)
    ring_w = mesh.area_weights[1:].reshape(nr, ntheta).sum(axis=1)
    mean_var = float(ring_w @ np.var(rings, axis=1) / np.sum(ring_w))
    return float(np.sqrt(mean_var) / spread)


def _golden_min(fun, a: float, b: float, tol: float = 1e-12) -> float:
    """Golden-section minimum of a unimodal fun on [a, b]."""
    inv = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = b - inv * (b - a)
    x2 = a + inv * (b - a)
    f1, f2 = fun(x1), fun(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv * (b - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv * (b - a)
            f2 = fun(x2)
    return 0.5 * (a + b)


def _aligned_distance(mesh: Mesh, f: np.ndarray, g: np.ndarray) -> float:
    """Weighted L2 distance after minimizing over a rotation of f about e3.

    The squared distance is a sinusoid in the angle; a coarse scan brackets
    the minimum and golden-section sharpens it.
    """
    w = mesh.area_weights
    c_cos = float(w @ (f[:, 0] * g[:, 0] + f[:, 1] * g[:, 1]))
    c_sin = float(w @ (f[:, 0] * g[:, 1] - f[:, 1] * g[:, 0]))
    base = float(w @ (np.sum(f * f, axis=1) + np.sum(g * g, axis=1))
                 - 2.0 * (w @ (f[:, 2] * g[:, 2])))

    def overlap_neg(theta):
        return -(c_cos * np.cos(theta) + c_sin * np.sin(theta))

    grid = np.linspace(0.0, 2.0 * np.pi, 65)[:-1]
    k = int(np.argmin(-(c_cos * np.cos(grid) + c_sin * np.sin(grid))))
    step = grid[1] - grid[0]
    theta = _golden_min(overlap_neg, grid[k] - step, grid[k] + step)
    d2 = base + 2.0 * overlap_neg(theta)
    return float(np.sqrt(max(d2, 0.0)))


def uniqueness_check(fields, mesh: Mesh) -> float:
    """Max pairwise weighted L2 distance of canonicalized fields, with the
    residual in-plane rotation optimized per pair.  Small values mean the
    family agrees up to the symmetries about e3."""
    if len(fields) < 2:
        raise ValueError("need at least two fields to compare")
    canon = []
    for field in fields:
        check_sphere_field(mesh, field)
        canon.append(canonicalize(mesh, field)[0])
    worst = 0.0
    for i in range(len(canon)):
        for j in range(i + 1, len(canon)):
            worst = max(worst, _aligned_distance(mesh, canon[i], canon[j]))
    return worst


def compare_solutions(p1: RadialProfile, p2: RadialProfile):
    """Ordering verdict for two radial phases phi = u/2.

    Requires the same (R, N) sample grid and ordered parameters
    kappa1 <= kappa2, gamma1 <= gamma2 with (kappa1, gamma1) != (kappa2,
    gamma2).  Returns (label, min_margin): "equal-0" / "equal-pi" when both
    phases sit at the same constant, else "strict" when phi1 < phi2 with
    margin > 1e-9 at every interior sample (and at r = R when gamma2 > 0),
    else "violated".  "equal-pi" refers to u = pi, i.e. phi = pi/2.
    """
    if p1.dim != p2.dim or p1.radius != p2.radius:
        raise ValueError("profiles live on different domains")
    if p1.r.shape != p2.r.shape or np.max(np.abs(p1.r - p2.r)) > 1e-12:
        raise ValueError("profiles use different sample grids")
    if p1.params is None or p2.params is None:
        raise ValueError("profiles carry no parameters")
    k1, g1 = p1.params.kappa, p1.params.gamma
    k2, g2 = p2.params.kappa, p2.params.gamma
    if not (k1 <= k2 and g1 <= g2 and (k1, g1) != (k2, g2)):
        raise ValueError(
            "need kappa1 <= kappa2, gamma1 <= gamma2, parameters distinct")
    phi1, phi2 = p1.u / 2.0, p2.u / 2.0
    if np.max(np.abs(phi1)) <= _EQUAL_TOL and np.max(np.abs(phi2)) <= _EQUAL_TOL:
        return "equal-0", 0.0
    if (np.max(np.abs(phi1 - np.pi / 2)) <= _EQUAL_TOL
            and np.max(np.abs(phi2 - np.pi / 2)) <= _EQUAL_TOL):
        return "equal-pi", 0.0
    diff = phi2 - phi1
    margin = float(np.min(diff[:-1] if g2 == 0.0 else diff))
    label = "strict" if margin > _STRICT_MARGIN else "violated"
    return label, margin


@dataclass(frozen=True)
class PhaseDiagram:
    """Classification of a (kappa, gamma) grid by least-energy candidate.

    classes[i, j] labels the cell (kappas[i], gammas[j]); the energy arrays
    follow the same layout.  inplane_energy and gamma_kappa are NaN where
    undefined (gamma = 0 resp. kappa = 0 or no trace constant available).
    """

    mode: str
    kappas: np.ndarray
    gammas: np.ndarray
    classes: np.ndarray
    min_energy: np.ndarray
    e3_energy: np.ndarray
    inplane_energy: np.ndarray
    kappa_gamma: np.ndarray
    gamma_kappa: np.ndarray
    c_trace: float
    failures: tuple


def _constant_profile(grid: np.ndarray, value: float, radius: float,
                      dim: int, params: Params) -> RadialProfile:
    return RadialProfile(radius=radius, dim=dim, r=grid,
                         u=np.full_like(grid, value),
                         du=np.zeros_like(grid), u0=value, params=params)


def _radial_cell(params: Params, radius: float, dim: int, dr):
    """(label, e_min, e_e3, e_inplane, failures) for one cell in radial mode.

    Constant-state energies use the same trapezoid quadrature as the solved
    profile so the least-energy comparison is internally consistent.
    """
    failures = []
    try:
        prof = solve_radial_bvp(params, radius, dim, dr=dr)
    except (RuntimeError, ValueError) as exc:
        failures.append({"kappa": params.kappa, "gamma": params.gamma,
                         "error": str(exc)})
        grid = np.linspace(0.0, radius, 1001)
        e_e3 = radial_energy(_constant_profile(grid, 0.0, radius, dim,
                                               params), params).total
        if params.gamma > 0.0:
            e_inp = radial_energy(_constant_profile(grid, np.pi, radius, dim,
                                                    params), params).total
            if e_inp < e_e3:
                return "constant-inplane", e_inp, e_e3, e_inp, failures
        else:
            e_inp = np.nan
        return "constant-e3", e_e3, e_e3, e_inp, failures
    e_min = radial_energy(prof, params).total
    e_e3 = radial_energy(_constant_profile(prof.r, 0.0, radius, dim, params),
                         params).total
    e_inp = np.nan
    if params.gamma > 0.0:
        e_inp = radial_energy(_constant_profile(prof.r, np.pi, radius, dim,
                                                params), params).total
    return prof.classification, e_min, e_e3, e_inp, failures


def _mesh_cell(mesh: Mesh, params: Params, seeds: int, opts: SolveOptions,
               seed0: int):
    """(label, e_min, e_e3, e_inplane, failures) for one cell in 2d mode:
    multi-seed solves plus both constant states, labeled by least energy."""
    failures = []
    e_e3, e_inp = constant_state_energies(mesh, params)
    candidates = [("constant-e3", e_e3)]
    if e_inp is not None:
        candidates.append(("constant-inplane", e_inp))
    for s in range(seeds):
        cell_opts = replace(opts, rng_seed=seed0 + s)
        try:
            field, report = minimize_sphere_field(mesh, params, cell_opts)
        except RuntimeError as exc:
            failures.append({"kappa": params.kappa, "gamma": params.gamma,
                             "seed": seed0 + s, "error": str(exc)})
            continue
        if not report.converged:
            failures.append({"kappa": params.kappa, "gamma": params.gamma,
                             "seed": seed0 + s, "error": "not converged"})
            continue
        candidates.append((report.classification, report.energy.total))
    label, e_min = min(candidates, key=lambda c: c[1])
    return label, e_min, e_e3, np.nan if e_inp is None else e_inp, failures


def _sweep_cell(mode: str, domain, params: Params, seeds: int,
                opts: SolveOptions, seed0: int, dr):
    """Picklable per-cell job so sweeps can fan out over processes."""
    if mode == "radial":
        return _radial_cell(params, domain[0], domain[1], dr)
    return _mesh_cell(domain, params, seeds, opts, seed0)


def phase_diagram_sweep(domain, kappa_grid, gamma_grid, seeds: int = 3,
                        options: SolveOptions | None = None,
                        base_seed: int = 0, dr: float | None = None,
                        c_trace: float | None = None,
                        jobs: int = 1) -> PhaseDiagram:
    """Classify every cell of a (kappa, gamma) grid.

    domain is either a Mesh (2d mode: multi-seed gradient solves) or a pair
    (radius, dim) (radial mode: shooting solves).  Each cell is labeled by
    the least-energy candidate among solver outputs and both constant
    states.  Threshold overlays kappa_gamma(gamma) and gamma_kappa(kappa)
    are attached per cell; c_trace is estimated from the mesh when not
    supplied (in radial mode only for dim = 2, via an auxiliary disk mesh).
    Cells are independent; jobs > 1 fans them out over processes.

    Raises RuntimeError if a cell violates the soundness inclusions: cells
    with kappa <= 0.8 kappa_gamma must classify constant-e3 and cells with
    gamma >= 1.25 gamma_kappa must classify constant-inplane.  Per-cell
    solver failures are recorded in .failures, not raised.
    """
    kappas = np.atleast_1d(np.asarray(kappa_grid, dtype=float))
    gammas = np.atleast_1d(np.asarray(gamma_grid, dtype=float))
    if kappas.size == 0 or gammas.size == 0:
        raise ValueError("kappa and gamma grids must be nonempty")
    if np.any(~np.isfinite(kappas)) or np.any(kappas < 0.0):
        raise ValueError("kappa grid must be finite and nonnegative")
    if np.any(~np.isfinite(gammas)) or np.any(gammas < 0.0):
        raise ValueError("gamma grid must be finite and nonnegative")
    if jobs < 1:
        raise ValueError("jobs must be >= 1")

    if isinstance(domain, Mesh):
        mode = "2d"
        domain_arg = domain
        c_omega = 2.0 / mesh_diameter(domain)
        if c_trace is None:
            c_trace = estimate_trace_constant(domain)
    else:
        mode = "radial"
        radius, dim = float(domain[0]), int(domain[1])
        if radius <= 0.0 or dim < 1:
            raise ValueError("radial domain needs radius > 0 and dim >= 1")
        domain_arg = (radius, dim)
        c_omega = dim / (2.0 * radius)
        if c_trace is None:
            c_trace = (estimate_trace_constant(build_disk_mesh(24, 48, radius))
                       if dim == 2 else np.nan)
    c_trace = float(c_trace)

    nk, ng = kappas.size, gammas.size
    classes = np.empty((nk, ng), dtype=object)
    e_min = np.empty((nk, ng))
    e_e3 = np.empty((nk, ng))
    e_inp = np.empty((nk, ng))
    opts = options if options is not None else SolveOptions()
    cells = [(i, j) for i in range(nk) for j in range(ng)]

    def cell_args(i, j):
        params = Params(kappa=float(kappas[i]), gamma=float(gammas[j]))
        return (mode, domain_arg, params, seeds, opts,
                base_seed + (i * ng + j) * seeds, dr)

    failures: list = []
    if jobs == 1:
        results = [_sweep_cell(*cell_args(i, j)) for i, j in cells]
    else:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_cell,
                                    *zip(*(cell_args(i, j)
                                           for i, j in cells))))
    for (i, j), cell in zip(cells, results):
        classes[i, j], e_min[i, j], e_e3[i, j], e_inp[i, j], fails = cell
        failures.extend(fails)

    delta = np.minimum(c_omega / 2.0, np.divide(
        1.0, gammas ** 2, out=np.full_like(gammas, np.inf), where=gammas > 0))
    kappa_gamma = np.where(gammas > 0.0, np.sqrt(delta * (c_omega - delta)),
                           c_omega)
    kappa_gamma = np.broadcast_to(kappa_gamma, (nk, ng)).copy()
    if np.isfinite(c_trace) and c_trace > 0.0:
        gamma_kappa = np.array([gamma_threshold(k, c_trace) if k > 0.0
                                else np.nan for k in kappas])
    else:
        gamma_kappa = np.full(nk, np.nan)
    gamma_kappa = np.broadcast_to(gamma_kappa[:, None], (nk, ng)).copy()

    for i in range(nk):
        for j in range(ng):
            if kappas[i] <= 0.8 * kappa_gamma[i, j] \
                    and classes[i, j] != "constant-e3":
                raise RuntimeError(
                    f"soundness violation at kappa={kappas[i]}, "
                    f"gamma={gammas[j]}: expected constant-e3, "
                    f"got {classes[i, j]}")
            if np.isfinite(gamma_kappa[i, j]) \
                    and gammas[j] >= 1.25 * gamma_kappa[i, j] \
                    and classes[i, j] != "constant-inplane":
                raise RuntimeError(
                    f"soundness violation at kappa={kappas[i]}, "
                    f"gamma={gammas[j]}: expected constant-inplane, "
                    f"got {classes[i, j]}")

    return PhaseDiagram(mode=mode, kappas=kappas, gammas=gammas,
                        classes=classes, min_energy=e_min, e3_energy=e_e3,
                        inplane_energy=e_inp, kappa_gamma=kappa_gamma,
                        gamma_kappa=gamma_kappa, c_trace=c_trace,
                        failures=tuple(failures))
