"""Numerical laboratory for a boundary-penalized Dirichlet energy.

The energy acts on unit-sphere-valued fields m on a planar domain:

    E(m) = int |grad m|^2  +  kappa^2 int (m . e3)^2
         + (1/gamma^2) int_boundary |m x e3|^2,

with the gamma = 0 limit pinning m = e3 on the boundary.  The package
provides structured meshes, energy evaluation, projected-gradient
minimization, a radial shooting solver, estimates of the functional
constants that locate the constant/nonconstant transition, and checks of
the structure theory (meridian form, uniqueness up to symmetry, monotone
comparison, radial symmetry).
"""

from .mesh import (
    Mesh,
    boundary_integrate,
    build_disk_mesh,
    build_rectangle_mesh,
    integrate,
    mesh_diameter,
    mesh_summary,
)
from .energy import (
    AxisSymmetry,
    EnergyBreakdown,
    Params,
    apply_symmetry,
    constant_state_energies,
    el_residual,
    energy_phase,
    energy_sphere_field,
    fold_positive,
    localized_energy_phase,
    phase_gradient,
    sphere_gradient,
)
from .minimize import (
    SolveOptions,
    SolveReport,
    StagnationError,
    canonicalize,
    minimize_phase,
    minimize_sphere_field,
    stability_gap,
)
from .radial import (
    RadialProfile,
    check_monotone,
    ode_residual,
    radial_energy,
    shoot,
    solve_radial_bvp,
    sphere_area,
)
from .constants import (
    ConvergenceError,
    ThresholdReport,
    estimate_trace_constant,
    gamma_threshold,
    kappa_threshold,
    threshold_report,
    trace_constant_dense,
    verify_poincare_inequality,
)
from .verify import (
    PhaseDiagram,
    compare_solutions,
    lift_phase,
    meridian_deviation,
    phase_diagram_sweep,
    radial_deviation,
    sign_consistency,
    uniqueness_check,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
