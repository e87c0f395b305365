"""
Where Eve's information overtakes Bob's
=======================================

Bob's information about the key falls with the error rate as 1 - h(e).
Eve gets an individual attack on every untagged pulse plus the whole bit of
every tagged one, and brighter pulses hand her more tagged pulses. The QBER
at which the two curves cross is the most noise the link can tolerate.
"""

import numpy as np

from pnrqkd.security import info_ab, info_ae, qber_grid, security_threshold

###############################################################################
# The crossing for three intensities

for mu in (0.1, 0.2, 0.3):
    t = security_threshold(mu)
    print(f"mu = {mu}: key possible below QBER {t.qber:.4f}")

###############################################################################
# A few rows of the curves themselves. ``pnrqkd fig2`` writes the whole grid.

grid = qber_grid()
for e in grid[::25]:
    row = "  ".join(f"{info_ae(float(e), mu):.4f}" for mu in (0.1, 0.2, 0.3))
    print(f"e = {e:.3f}  I_AB = {info_ab(float(e)):.4f}  I_AE = {row}")

###############################################################################
# The threshold keeps falling as the source gets brighter.

mus = np.linspace(0.05, 0.5, 10)
print(np.round([security_threshold(m).qber for m in mus], 4))
