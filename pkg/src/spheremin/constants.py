"""Functional-inequality constants behind the constant/nonconstant transition.

Three ingredients locate the transition thresholds:

- c_Omega = dim / diameter(Omega), the constant in the boundary-weighted
  Poincare inequality  delta (c_Omega - delta) int u^2
  <= int |grad u|^2 + delta int_bnd u^2  for 0 < delta < c_Omega;
- from it, the lower threshold kappa_gamma = sqrt(delta_gamma (c_Omega -
  delta_gamma)) with delta_gamma = min(c_Omega / 2, 1/gamma^2) for gamma > 0,
  and kappa_0 = c_Omega for hard boundary data (gamma = 0);
- c_trace, the best constant with c_trace ||u||_L2(bnd) <= ||u||_H1, i.e.
  the square root of the smallest eigenvalue of (K + M) u = lambda B u with
  K, M, B the discrete stiffness, area-mass, and boundary-mass forms; from
  it the upper threshold gamma_kappa = 1 / (c_trace * min(1, kappa)).

The eigenvalue is estimated by inverse power iteration on the pencil and
cross-checked by a dense Schur-complement eigensolve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import Mesh, mesh_diameter, mesh_summary


class ConvergenceError(RuntimeError):
    """Eigensolver failed to settle; carries the last estimate."""

    def __init__(self, message: str, last_estimate: float):
        super().__init__(message)
        self.last_estimate = last_estimate


@dataclass(frozen=True)
class ThresholdReport:
    """All threshold ingredients for one domain and parameter choice."""

    kappa: float
    gamma: float
    c_omega: float
    delta_gamma: float | None
    kappa_gamma: float
    c_trace: float
    gamma_kappa: float | None
    mesh: dict

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "gamma": self.gamma,
                "c_omega": self.c_omega, "delta_gamma": self.delta_gamma,
                "kappa_gamma": self.kappa_gamma, "c_trace": self.c_trace,
                "gamma_kappa": self.gamma_kappa, "mesh": dict(self.mesh)}


def kappa_threshold(gamma: float, mesh: Mesh):
    """(c_Omega, delta_gamma, kappa_gamma) for the meshed domain.

    Below kappa_gamma only the e3 constants minimize.  gamma = 0 returns
    the hard-data threshold kappa_0 = c_Omega with delta_gamma = None.
    """
    if gamma < 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    c_omega = 2.0 / mesh_diameter(mesh)
    if gamma == 0.0:
        return c_omega, None, c_omega
    delta = min(c_omega / 2.0, 1.0 / gamma ** 2)
    return c_omega, delta, float(np.sqrt(delta * (c_omega - delta)))


def gamma_threshold(kappa: float, c_trace: float) -> float:
    """gamma_kappa = 1/(c_trace * min(1, kappa)); above it only in-plane
    constants minimize.  Rejects kappa = 0 (no in-plane threshold exists)."""
    if not kappa > 0.0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if not c_trace > 0.0:
        raise ValueError(f"c_trace must be positive, got {c_trace}")
    return float(1.0 / (c_trace * min(1.0, kappa)))


def _poincare_samples(mesh: Mesh, trials: int, rng: np.random.Generator):
    """Random smooth test functions: quadratic polynomial + 3 plane waves."""
    x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
    basis = np.column_stack([np.ones_like(x), x, y, x * x, x * y, y * y])
    coeff = rng.normal(size=(6, trials))
    u = basis @ coeff
    for _ in range(3):
        amp = rng.normal(size=trials)
        px, py = rng.uniform(-3.0, 3.0, size=(2, trials))
        theta = rng.uniform(0.0, 2.0 * np.pi, size=trials)
        u += amp * np.cos(np.outer(x, px) + np.outer(y, py) + theta)
    return u


def verify_poincare_inequality(mesh: Mesh, delta: float, trials: int = 100,
                               rng_seed: int = 0) -> float:
    """Minimum slack of the boundary-weighted Poincare inequality over
    random smooth test functions; nonnegative slack confirms it."""
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if trials < 1:
        raise ValueError("need at least one trial")
    c_omega = 2.0 / mesh_diameter(mesh)
    rng = np.random.default_rng(rng_seed)
    u = _poincare_samples(mesh, trials, rng)
    grad2 = np.sum(u * (mesh.stiffness @ u), axis=0)
    bnd2 = mesh.arc_weights @ (u * u)
    mass2 = mesh.area_weights @ (u * u)
    slack = grad2 + delta * bnd2 - delta * (c_omega - delta) * mass2
    return float(np.min(slack))


def _pencil(mesh: Mesh):
    a = (mesh.stiffness + sp.diags(mesh.area_weights)).tocsc()
    b = sp.diags(mesh.arc_weights).tocsc()
    return a, b


def estimate_trace_constant(mesh: Mesh, tol: float = 1e-10,
                            max_iterations: int = 10000) -> float:
    """c_trace via inverse power iteration on (K + M) u = lambda B u.

    B is singular (supported on boundary nodes), so the iteration runs on
    x <- (K+M)^{-1} B x, whose dominant eigenvalue is 1/lambda_min over the
    boundary-coupled subspace.  Raises ConvergenceError (carrying the last
    Rayleigh quotient) if the quotient does not settle to tol relative.
    """
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    a, b = _pencil(mesh)
    solve = spla.factorized(a)
    x = np.ones(mesh.n_nodes)
    lam_prev = np.inf
    for _ in range(max_iterations):
        z = b @ x
        x = solve(z)
        x /= np.linalg.norm(x)
        bxx = float(x @ (b @ x))
        if bxx <= 0.0:
            raise ConvergenceError("iterate lost boundary support", np.nan)
        lam = float(x @ (a @ x)) / bxx
        if abs(lam - lam_prev) <= tol * abs(lam):
            return float(np.sqrt(lam))
        lam_prev = lam
    raise ConvergenceError(
        f"inverse power iteration did not converge in {max_iterations} steps",
        float(np.sqrt(lam)))


def trace_constant_dense(mesh: Mesh) -> float:
    """Dense cross-check: eliminate interior nodes by a Schur complement and
    solve the reduced boundary pencil with a direct symmetric eigensolver."""
    a, b = _pencil(mesh)
    a = a.toarray()
    ii, bb = mesh.interior, mesh.boundary
    a_ii = a[np.ix_(ii, ii)]
    a_ib = a[np.ix_(ii, bb)]
    a_bb = a[np.ix_(bb, bb)]
    schur = a_bb - a_ib.T @ np.linalg.solve(a_ii, a_ib)
    schur = 0.5 * (schur + schur.T)
    b_bb = np.diag(mesh.arc_weights[bb])
    lam = scipy.linalg.eigh(schur, b_bb, eigvals_only=True)
    return float(np.sqrt(lam[0]))


def threshold_report(mesh: Mesh, kappa: float, gamma: float) -> ThresholdReport:
    """Bundle all constants for one (kappa, gamma); gamma_kappa is None when
    kappa = 0."""
    c_omega, delta, kappa_gamma = kappa_threshold(gamma, mesh)
    c_trace = estimate_trace_constant(mesh)
    gamma_kappa = gamma_threshold(kappa, c_trace) if kappa > 0.0 else None
    return ThresholdReport(kappa=float(kappa), gamma=float(gamma),
                           c_omega=float(c_omega), delta_gamma=delta,
                           kappa_gamma=float(kappa_gamma),
                           c_trace=float(c_trace), gamma_kappa=gamma_kappa,
                           mesh=mesh_summary(mesh))
