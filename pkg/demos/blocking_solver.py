"""
Why Eve has to capture photon by photon
=======================================

Suppose Eve tries to fake the lossy channel by blocking whole pulses. To
match the vacuum and single-photon rates she must block nearly every single
photon pulse, and the resulting two-photon rate comes out too high. Her
blocking probabilities also depend on the intensity, so no one choice can
serve the signal and the decoy at once.

Capturing each photon independently with probability 1 - eta fixes every
class for every intensity at once.
"""

import numpy as np

from pnrqkd.adversary import solve_blocking_distribution

sol = solve_blocking_distribution(mu=0.1, mu_prime=0.5, eta=0.1)

print(f"P_Eve(1): exact {sol.p_eve_1:.6f}, first order {sol.p_eve_1_first_order:.6f}")
print(f"P_Eve(2): {sol.p_eve_2:.6f}, first order {sol.p_eve_2_first_order:.6f}")

inf = sol.infeasibility
print(f"two-photon weight after naive blocking {inf.left:.3e} vs lossy channel {inf.right:.3e}")

###############################################################################
# Pulse-level blocking solved separately for each intensity

np.set_printoptions(precision=4, suppress=True)
print("signal:", sol.cascade_signal[:4])
print("decoy: ", sol.cascade_decoy[:4])
print("one strategy serves both:", sol.cascade_consistent)

###############################################################################
# The per-photon solution and its residuals

print(sol.to_csv())
