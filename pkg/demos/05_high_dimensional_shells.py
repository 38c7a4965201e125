"""Where samples actually live in high dimension, and what it costs.

For an isotropic Gaussian the density peaks at the origin, but the mass
(density times volume) peaks on a shell of radius ~ sqrt(d-1) sigma.  A
random-walk proposal must shrink like 1/sqrt(d) to keep landing on that
shell; a fixed-width proposal is rejected exponentially often.
"""

import numpy as np

from mcmclab.mh import GaussianRandomWalk, acceptance_fraction, run_chain
from mcmclab.seeding import derive_rng
from mcmclab.targets import IsotropicGaussianTarget, radial_log_mass, shell_stats

print("shell statistics of the d-dimensional unit Gaussian:")
print(f"{'d':>4} {'r_peak':>8} {'r_mean':>8} {'width':>8} {'separation':>11}")
for d in (1, 2, 5, 10, 26, 100):
    s = shell_stats(d, 1.0)
    print(f"{d:>4} {s.r_peak:8.3f} {s.r_mean:8.3f} {s.dr_mean:8.3f} {s.dr_sep:11.3f}")

print("\nradial mass profile at d=10 (each bar ~ relative mass):")
rs = np.linspace(0.25, 6.0, 24)
logm = radial_log_mass(10, 1.0, rs)
mass = np.exp(logm - logm.max())
for r, m in zip(rs, mass):
    print(f"  r={r:4.2f} |{'#' * int(round(40 * m))}")

print("\nacceptance vs dimension, fixed width sqrt(2) against 2.5/sqrt(d):")
print(f"{'d':>4} {'fixed':>9} {'~exp(-d/4-1/2)':>15} {'adaptive':>9}")
for d in (2, 5, 10, 20):
    target = IsotropicGaussianTarget(d, 1.0)
    rng = derive_rng(77, "demo-shell", "fixed", d)
    fixed = run_chain(target, GaussianRandomWalk(np.sqrt(2.0)),
                      rng.standard_normal(d), 8000, rng)
    rng = derive_rng(77, "demo-shell", "adaptive", d)
    adaptive = run_chain(target, GaussianRandomWalk(2.5 / np.sqrt(d)),
                         rng.standard_normal(d), 8000, rng)
    print(
        f"{d:>4} {acceptance_fraction(fixed):9.4f} "
        f"{np.exp(-d / 4.0 - 0.5):15.4f} {acceptance_fraction(adaptive):9.4f}"
    )
print("\nshrinking the proposal keeps a constant ~25% of moves on the shell.")
