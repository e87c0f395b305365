"""
Splitting photons quietly, and not so quietly
=============================================

With photon-number splitting (PNS) Eve keeps each photon with probability
1 - eta and sends the rest on through a lossless line. Bob's photon-number
statistics are then exactly those of the lossy channel, so the attack
cannot be seen. Only the tagged fraction limits what she learns.

The replacing variant (PNSR) swaps one photon of every multiphoton pulse for
a resent copy of her own measurement. The count is unchanged but the copy is
wrong a quarter of the time. Because Bob resolves photon number, his
two-photon error rate gives the attack away.
"""

from pnrqkd.adversary import Attack, ChannelConfig
from pnrqkd.detector import DetectorConfig
from pnrqkd.protocol import SessionConfig, run_session, sift, verify
from pnrqkd.source import SourceConfig

source = SourceConfig(mu=0.3, mu_prime=0.6)
detector = DetectorConfig(n_ports=16)

for attack in (Attack.NONE, Attack.PNS, Attack.PNSR):
    config = SessionConfig(source, ChannelConfig(0.2, attack), detector, n_pulses=10**6, master_seed=42)
    log = run_session(config)
    report = verify(sift(log), log)
    print(f"--- attack: {attack.value}")
    print(report.summary())
