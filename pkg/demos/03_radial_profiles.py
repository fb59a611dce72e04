"""Solve the radial reduction by shooting and watch the two regimes.

On the unit disk the doubled polar angle u(r) solves

    u'' + (N - 1)/r u' + kappa^2 sin u = 0,   u'(0) = 0,

closed at r = R by u'(R) + sin(u(R)) / gamma^2 = 0 (or u(R) = 0 when
gamma = 0).  Whether a nonconstant profile exists depends on kappa: below
the first Robin eigenvalue of the disk the only solutions are the
constants, above it a strictly decreasing profile appears.
"""

import numpy as np

from spheremin.energy import Params
from spheremin.radial import check_monotone, ode_residual, radial_energy, solve_radial_bvp

# subcritical: kappa^2 = 5 at gamma = 0.1 sits below the threshold
# kappa*^2 = 5.6687 (the root of 100 J0(k) = k J1(k)), so the shooting
# scan finds no interior zero of the closure and reports the constant
sub = solve_radial_bvp(Params(kappa=np.sqrt(5.0), gamma=0.1), 1.0, 2)
print("kappa^2 = 5:  classification =", sub.classification,
      " energy = %.10f (5 pi = %.10f)"
      % (radial_energy(sub, sub.params).total, 5 * np.pi))

# supercritical: kappa^2 = 8 is above threshold and the profile exists
params = Params(kappa=np.sqrt(8.0), gamma=0.1)
sup = solve_radial_bvp(params, 1.0, 2)
print("kappa^2 = 8:  classification =", sup.classification)
print("  u(0) = %.10f   u(R) = %.10f   closure residual = %.2e"
      % (sup.u0, sup.u[-1], sup.closure))
print("  monotone decreasing:", check_monotone(sup))
print("  ODE residual (max over interior): %.2e" % ode_residual(sup, params))
print("  energy: %.10f" % radial_energy(sup, params).total)

# print the profile at a few radii; phi = u / 2 is the polar angle of the
# field itself, so m3 = cos(phi) decays from near +1 toward the rim
idx = np.linspace(0, len(sup.r) - 1, 11).astype(int)
print("  r        u(r)      phi(r)    m3(r)")
for i in idx:
    print("  %.2f   %8.5f  %8.5f  %8.5f"
          % (sup.r[i], sup.u[i], sup.u[i] / 2, np.cos(sup.u[i] / 2)))

# profiles grow with kappa: a comparison chain at fixed gamma
print("chain at gamma = 0.5:")
for kappa in (0.5, 1.0, 2.0, 4.0):
    p = solve_radial_bvp(Params(kappa=kappa, gamma=0.5), 1.0, 2)
    print("  kappa = %.1f   class = %-16s  u(0) = %.6f"
          % (kappa, p.classification, p.u0))
