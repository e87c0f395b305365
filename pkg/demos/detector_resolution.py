"""
How well a beam-splitter tree counts photons
============================================

Bob splits each pulse over N ports, and every port has a polarizing beam
splitter with a detector on each output. Two photons that reach the same
detector give one click, so a two-photon pulse measured as the same bit is
undercounted with probability 1/N.
"""

import numpy as np

from pnrqkd.adversary.channel import ChannelBatch
from pnrqkd.detector import DetectorConfig, check_dark_count_budget, collision_probability, detect_batch

rng = np.random.default_rng(0)
size = 200_000

for ports in (4, 16, 64):
    cfg = DetectorConfig(ports)
    basis = rng.integers(0, 2, size=size, dtype=np.int8)
    zeros = np.zeros(size, dtype=np.int8)
    pairs = ChannelBatch(
        np.arange(size), np.full(size, 2), basis, zeros, np.zeros(size, dtype=np.int64),
        zeros, zeros, np.zeros(size, dtype=np.int64), np.zeros(size, dtype=bool), np.zeros(size, dtype=bool),
    )
    det = detect_batch(pairs, cfg, rng)
    same = det.bob_basis == basis
    print(f"N = {ports:3d}: simulated {np.mean(det.resolved_count[same] == 1):.4f}, "
          f"analytic {collision_probability(2, cfg):.4f}")

###############################################################################
# Dark counts have to stay well below the two-photon arrival rate.

for ports in (16, 1024):
    b = check_dark_count_budget(DetectorConfig(ports, e_dark=1e-5), mu=0.1, eta=0.1)
    print(f"N = {ports}: N e_dark = {b.background:.2e} vs mu eta / 2 = {b.allowance:.2e} -> {'ok' if b.passed else 'too noisy'}")
