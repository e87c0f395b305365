import math

import numpy as np
import pytest

from pnrqkd.adversary import Attack, ChannelConfig
from pnrqkd.detector import AMBIGUOUS, DetectorConfig
from pnrqkd.exceptions import KeyRefusedError
from pnrqkd.io import read_columns
from pnrqkd.protocol import (
    SessionConfig,
    Verdict,
    extract_raw_key,
    run_session,
    sift,
    tagged_fraction,
    verify,
)
from pnrqkd.source import PulseClass, SourceConfig


def session(n=10**6, seed=1, mu=0.1, mu_prime=0.5, eta=0.1, attack="none", params=None, e_dark=0.0, ports=16,
            error_rate=0.0, chunk_size=None):
    kwargs = {} if chunk_size is None else {"chunk_size": chunk_size}
    cfg = SessionConfig(
        SourceConfig(mu, mu_prime),
        ChannelConfig(eta, Attack(attack), params or {}, error_rate=error_rate),
        DetectorConfig(ports, e_dark),
        n,
        seed,
        **kwargs,
    )
    return run_session(cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        session(n=0)


def test_small_run_sift_size():
    n, mu, mu_p, eta = 10**4, 0.1, 0.5, 0.1
    log = session(n=n, seed=3, mu=mu, mu_prime=mu_p, eta=eta)
    p = 0.5 * (1 - math.exp(-eta * mu)) + 0.5 * (1 - math.exp(-eta * mu_p))
    expected = n * p / 2
    sigma = math.sqrt(n * (p / 2) * (1 - p / 2))
    assert len(sift(log)) > 0
    assert abs(len(sift(log)) - expected) <= 3 * sigma


def test_determinism():
    a = session(n=3 * 10**5, seed=9, chunk_size=1 << 16)
    b = session(n=3 * 10**5, seed=9, chunk_size=1 << 16)
    assert a.to_csv() == b.to_csv()
    assert session(n=10**4, seed=10).to_csv() != session(n=10**4, seed=11).to_csv()


def test_every_pulse_traced():
    log = session(n=50_000, seed=2)
    assert np.array_equal(log.pulses.id, np.arange(50_000))
    assert np.array_equal(log.channel.pulse_id, log.pulses.id)
    assert np.array_equal(log.detection.pulse_id, log.pulses.id)


def test_lossless_noiseless_channel_has_no_errors():
    sifted = sift(session(n=10**5, eta=1.0))
    assert len(sifted) > 0 and not sifted.error.any()


def test_no_attack_zero_qber():
    sifted = sift(session(n=10**6, seed=4))
    assert sifted.qber() == 0.0 and sifted.qber(key_only=False) == 0.0


class TestSift:
    log = session(n=4 * 10**5, seed=5, mu=0.3, mu_prime=0.6, eta=0.5, e_dark=1e-3, ports=4)
    sifted = sift(log)

    def test_basis_matched_only(self):
        idx = self.sifted.pulse_id
        assert np.array_equal(self.log.detection.bob_basis[idx], self.log.pulses.basis[idx])

    def test_no_ambiguous_or_empty(self):
        idx = self.sifted.pulse_id
        assert np.all(self.log.detection.measured_bit[idx] != AMBIGUOUS)
        assert np.all(self.sifted.photon_class >= 1)
        ambiguous = np.flatnonzero(self.log.detection.measured_bit == AMBIGUOUS)
        assert not np.isin(ambiguous, idx).any()

    def test_multiphoton_kept_for_statistics(self):
        multi = self.sifted.photon_class >= 2
        assert multi.any()
        assert np.array_equal(self.sifted.key_discard, multi)
        assert all(not r.key_eligible for r in (self.sifted.record(i) for i in np.flatnonzero(multi)[:20]))

    def test_half_of_single_clicks_retained(self):
        # multi-click events in the wrong basis are often ambiguous, so only single clicks split evenly
        d = self.log.detection
        n = int(np.count_nonzero(d.resolved_count == 1))
        kept = int(np.count_nonzero(self.sifted.photon_class == 1))
        assert abs(kept / n - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_about_half_of_unambiguous_events_retained():
    log = session(n=4 * 10**5, seed=5)
    d = log.detection
    n = int(np.count_nonzero((d.resolved_count >= 1) & (d.measured_bit != AMBIGUOUS)))
    assert abs(len(sift(log)) / n - 0.5) <= 3 * math.sqrt(0.25 / n)


class TestVerify:
    def test_honest_session_secure(self):
        log = session(seed=7)
        report = verify(sift(log), log)
        assert report.overall_verdict is Verdict.SECURE, report.summary()
        assert report.gof_verdict and report.qber_consistency_verdict

    def test_pns_invisible(self):
        # per-photon capture thins exactly like loss, so Bob's records match an honest run draw for draw
        attacked = session(seed=8, mu=0.2, mu_prime=0.5, attack="pns")
        honest = session(seed=8, mu=0.2, mu_prime=0.5)
        report = verify(sift(attacked), attacked)
        baseline = verify(sift(honest), honest)
        assert np.array_equal(attacked.detection.resolved_count, honest.detection.resolved_count)
        assert report.histograms == baseline.histograms
        assert report.qber_counts == baseline.qber_counts
        assert report.overall_verdict is baseline.overall_verdict
        assert 0 < report.delta_empirical <= 0.2
        assert report.delta_bound == pytest.approx(0.2 * 0.9)

    def test_pns_passes_verification(self):
        secure = 0
        for seed in range(20):
            log = session(n=5 * 10**5, seed=300 + seed, mu=0.2, mu_prime=0.5, attack="pns")
            secure += verify(sift(log), log).overall_verdict is Verdict.SECURE
        # honest sessions reject at about 3%, so 20 runs should show at most a few
        assert secure >= 17

    def test_pnsr_detected(self):
        log = session(seed=9, mu=0.3, mu_prime=0.6, eta=0.2, attack="pnsr")
        report = verify(sift(log), log)
        assert report.overall_verdict is Verdict.EAVESDROPPER_DETECTED
        for cls in PulseClass:
            e = report.qber_per_n[cls]
            assert e[1] == 0.0 and e[2] - e[1] >= 0.2

    def test_pnsr_beats_no_attack_baseline(self):
        base = session(n=5 * 10**5, seed=10, mu=0.3, mu_prime=0.6, eta=0.2)
        attacked = session(n=5 * 10**5, seed=10, mu=0.3, mu_prime=0.6, eta=0.2, attack="pnsr")
        e_base = verify(sift(base), base).qber_per_n[PulseClass.SIGNAL][2]
        e_att = verify(sift(attacked), attacked).qber_per_n[PulseClass.SIGNAL][2]
        assert e_att - e_base >= 0.2

    def test_uniform_noise_keeps_qber_consistent(self):
        log = session(seed=11, eta=0.5, mu=0.3, mu_prime=0.6, error_rate=0.05)
        report = verify(sift(log), log)
        assert report.qber_consistency_verdict, report.summary()
        assert report.overall_verdict is Verdict.SECURE

    def test_si_attack_is_qber_level(self):
        log = session(seed=12, eta=0.5, mu=0.3, mu_prime=0.6, attack="si", params={"qber": 0.1})
        report = verify(sift(log), log)
        # flips only hit single-photon pulses, so e_1 rises and e_n stops being flat
        assert report.qber_per_n[PulseClass.SIGNAL][1] > 0.05
        assert report.overall_verdict is Verdict.EAVESDROPPER_DETECTED

    def test_inconclusive_on_low_statistics(self):
        log = session(n=10**4, seed=13)
        report = verify(sift(log), log)
        assert report.overall_verdict is Verdict.INCONCLUSIVE
        with pytest.raises(KeyRefusedError):
            extract_raw_key(sift(log), report)

    def test_report_serialization(self):
        log = session(n=2 * 10**5, seed=14)
        report = verify(sift(log), log)
        cols = read_columns(report.to_csv())
        assert list(cols) == ["class", "n", "observed", "expected_prob", "errors", "matched_events", "e_n"]
        assert len(cols["n"]) == 12
        assert report.summary().startswith("verdict: ")

    def test_delta_in_unit_interval(self):
        log = session(n=2 * 10**5, seed=15, attack="pns")
        report = verify(sift(log), log)
        assert 0 <= report.delta_empirical <= 1 and 0 <= report.delta_empirical_decoy <= 1


def test_honest_calibration():
    secure = 0
    for seed in range(100):
        log = session(seed=1000 + seed, e_dark=1e-5, error_rate=0.03)
        secure += verify(sift(log), log).overall_verdict is Verdict.SECURE
    assert secure >= 95


class TestExtract:
    log = session(seed=21, eta=0.5, mu=0.3, mu_prime=0.6)
    sifted = sift(log)
    report = verify(sifted, log)

    def test_key(self):
        assert self.report.overall_verdict is Verdict.SECURE
        alice, bob = extract_raw_key(self.sifted, self.report)
        single = self.sifted.photon_class == 1
        assert alice.size == bob.size == int(single.sum())
        assert np.array_equal(alice, self.sifted.alice_bit[single])
        assert np.array_equal(alice, bob)

    def test_no_multiphoton_positions(self):
        alice, _ = extract_raw_key(self.sifted, self.report)
        assert alice.size == int(np.count_nonzero(~self.sifted.key_discard))

    def test_decoy_bits_included(self):
        single = self.sifted.photon_class == 1
        assert np.count_nonzero(single & (self.sifted.cls == PulseClass.DECOY)) > 0

    def test_refused_when_detected(self):
        log = session(seed=22, mu=0.3, mu_prime=0.6, eta=0.2, attack="pnsr")
        with pytest.raises(KeyRefusedError):
            extract_raw_key(sift(log), verify(sift(log), log))


def test_tagged_fraction_bounded():
    log = session(seed=23, mu=0.2, attack="pns")
    for cls in PulseClass:
        assert 0 < tagged_fraction(log, cls) <= log.config.source.mean_for(cls)
    assert tagged_fraction(session(n=10**5, seed=24)) == 0.0


def test_csv_layouts():
    log = session(n=2 * 10**4, seed=25)
    cols = read_columns(log.to_csv())
    assert list(cols) == [
        "id", "class", "basis", "bit", "photon_count", "forwarded", "eve_captured", "substituted",
        "tagged", "bob_basis", "resolved_count", "measured_bit", "dark_clicks",
    ]
    assert len(cols["id"]) == 2 * 10**4
    det = read_columns(log.detections_csv())
    assert list(det) == ["pulse_id", "resolved_count", "bob_basis", "measured_bit", "dark_clicks"]
    assert all(int(c) >= 1 for c in det["resolved_count"])
    assert list(read_columns(log.pulses_csv())) == ["id", "class", "basis", "bit", "photon_count"]
