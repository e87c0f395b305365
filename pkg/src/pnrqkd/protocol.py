"""BB84 session orchestration: emit, transmit, detect, sift, verify, extract."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .adversary.channel import ChannelBatch, ChannelConfig, transmit_batch
from .detector import (
    AMBIGUOUS,
    DetectionBatch,
    DetectorConfig,
    background_contribution,
    detect_batch,
    resolved_count_distribution,
)
from .exceptions import KeyRefusedError
from .io import columns_csv, csv_text, fmt
from .security import delta_bound
from .source import PulseBatch, PulseClass, SourceConfig, emit_pulses
from .stats import DEFAULT_SIGNIFICANCE, GOF_CLASSES, CountHistogram, GofResult, chi_square_gof, corrected_rates_agree

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1 << 17
MIN_SIFTED_PER_CLASS = 1000
#: e_n is only compared once an n-click class holds this many basis-matched events.
MIN_QBER_EVENTS = 50
QBER_SIGMAS = 3.0


@dataclass(frozen=True)
class SessionConfig:
    source: SourceConfig
    channel: ChannelConfig
    detector: DetectorConfig
    n_pulses: int
    master_seed: int
    chunk_size: int = CHUNK_SIZE

    def __post_init__(self) -> None:
        if self.n_pulses < 1:
            raise ValueError(f"n_pulses must be positive, got {self.n_pulses}")
        if self.chunk_size < 1:
            raise ValueError(f"chunk_size must be positive, got {self.chunk_size}")
        if self.n_pulses < 10_000:
            logger.warning("n_pulses=%d is below 1e4; verification will likely be inconclusive", self.n_pulses)


@dataclass
class SessionLog:
    config: SessionConfig
    pulses: PulseBatch
    channel: ChannelBatch
    detection: DetectionBatch

    def __len__(self) -> int:
        return len(self.pulses)

    @property
    def detected(self) -> np.ndarray:
        return self.detection.resolved_count >= 1

    def columns(self) -> dict[str, np.ndarray]:
        p, c, d = self.pulses, self.channel, self.detection
        return {
            "id": p.id,
            "class": p.cls,
            "basis": p.basis,
            "bit": p.bit,
            "photon_count": p.photon_count,
            "forwarded": c.forwarded,
            "eve_captured": c.eve_captured,
            "substituted": c.substituted.astype(np.int8),
            "tagged": c.tagged.astype(np.int8),
            "bob_basis": d.bob_basis,
            "resolved_count": d.resolved_count,
            "measured_bit": d.measured_bit,
            "dark_clicks": d.dark_clicks,
        }

    def to_csv(self) -> str:
        cols = self.columns()
        table = np.column_stack([np.asarray(v, dtype=np.int64) for v in cols.values()])
        lines = [",".join(cols)]
        # all columns are integers, so a vectorized join is exact and much faster than csv.writer
        lines.extend(",".join(map(str, row)) for row in table.tolist())
        return "\n".join(lines) + "\n"

    def pulses_csv(self) -> str:
        p = self.pulses
        return columns_csv({"id": p.id, "class": p.cls, "basis": p.basis, "bit": p.bit, "photon_count": p.photon_count})

    def detections_csv(self) -> str:
        """Events with at least one click, columns (pulse_id, resolved_count, bob_basis, measured_bit, dark_clicks)."""
        d = self.detection
        keep = d.resolved_count >= 1
        return columns_csv(
            {
                "pulse_id": d.pulse_id[keep],
                "resolved_count": d.resolved_count[keep],
                "bob_basis": d.bob_basis[keep],
                "measured_bit": d.measured_bit[keep],
                "dark_clicks": d.dark_clicks[keep],
            }
        )


def run_session(config: SessionConfig) -> SessionLog:
    """Simulate ``config.n_pulses`` pulses end to end.

    The master seed is split into one child stream per chunk, and each chunk
    draws source, channel and detector randomness from its own sub-streams,
    so the log depends only on the config.
    """
    n_chunks = -(-config.n_pulses // config.chunk_size)
    children = np.random.SeedSequence(config.master_seed).spawn(n_chunks)
    pulses, channel, detection = [], [], []
    for k, seq in enumerate(children):
        start = k * config.chunk_size
        size = min(config.chunk_size, config.n_pulses - start)
        src_rng, ch_rng, det_rng = (np.random.default_rng(s) for s in seq.spawn(3))
        p = emit_pulses(config.source, size, src_rng, start_id=start)
        c = transmit_batch(p, config.channel, ch_rng)
        d = detect_batch(c, config.detector, det_rng)
        pulses.append(p)
        channel.append(c)
        detection.append(d)
    return SessionLog(
        config,
        PulseBatch.concatenate(pulses),
        ChannelBatch.concatenate(channel),
        DetectionBatch.concatenate(detection),
    )


@dataclass(frozen=True)
class SiftedRecord:
    pulse_id: int
    cls: PulseClass
    alice_bit: int
    bob_bit: int
    photon_class: int
    error: bool

    @property
    def key_eligible(self) -> bool:
        return self.photon_class == 1


@dataclass
class SiftedEvents:
    pulse_id: np.ndarray
    cls: np.ndarray
    alice_bit: np.ndarray
    bob_bit: np.ndarray
    photon_class: np.ndarray

    def __len__(self) -> int:
        return int(self.pulse_id.size)

    @property
    def error(self) -> np.ndarray:
        return self.alice_bit != self.bob_bit

    @property
    def key_discard(self) -> np.ndarray:
        """Multiphoton-resolved positions: kept for statistics, never used for key."""
        return self.photon_class >= 2

    def record(self, i: int) -> SiftedRecord:
        return SiftedRecord(
            int(self.pulse_id[i]),
            PulseClass(int(self.cls[i])),
            int(self.alice_bit[i]),
            int(self.bob_bit[i]),
            int(self.photon_class[i]),
            bool(self.alice_bit[i] != self.bob_bit[i]),
        )

    def __iter__(self):
        return (self.record(i) for i in range(len(self)))

    def qber(self, key_only: bool = True) -> float:
        mask = ~self.key_discard if key_only else np.ones(len(self), dtype=bool)
        return float(self.error[mask].mean()) if mask.any() else float("nan")


def sift(log: SessionLog) -> SiftedEvents:
    """Keep basis-matched, unambiguous events with at least one click."""
    p, d = log.pulses, log.detection
    bob_bit = d.measured_bit
    keep = (d.bob_basis == p.basis) & (d.resolved_count >= 1) & (bob_bit != AMBIGUOUS)
    return SiftedEvents(p.id[keep], p.cls[keep], p.bit[keep], bob_bit[keep], d.resolved_count[keep])


class Verdict(str, Enum):
    SECURE = "secure"
    EAVESDROPPER_DETECTED = "eavesdropper_detected"
    INCONCLUSIVE = "inconclusive"


@dataclass
class VerificationReport:
    histograms: dict[PulseClass, CountHistogram]
    expected: dict[PulseClass, np.ndarray]
    gof: dict[PulseClass, GofResult]
    qber_counts: dict[PulseClass, dict[int, tuple[int, int]]]
    qber_consistency_verdict: bool
    delta_empirical: float
    delta_empirical_decoy: float
    delta_bound: float
    sifted_per_class: dict[PulseClass, int]
    overall_verdict: Verdict
    findings: list[str] = field(default_factory=list)

    @property
    def qber_per_n(self) -> dict[PulseClass, dict[int, float]]:
        return {
            cls: {n: (err / tot if tot else float("nan")) for n, (err, tot) in per_n.items()}
            for cls, per_n in self.qber_counts.items()
        }

    @property
    def gof_verdict(self) -> bool:
        return all(g.passed for g in self.gof.values())

    def to_csv(self) -> str:
        """Rows (class, n, observed, expected_prob, errors, matched_events, e_n)."""
        rows = []
        for cls in PulseClass:
            hist = self.histograms[cls].counts
            for n in range(len(hist)):
                err, tot = self.qber_counts[cls].get(n, (0, 0))
                e_n = err / tot if tot else ""
                rows.append([cls.name.lower(), n, hist[n], self.expected[cls][n], err, tot, e_n])
        return csv_text(["class", "n", "observed", "expected_prob", "errors", "matched_events", "e_n"], rows)

    def summary(self) -> str:
        lines = [f"verdict: {self.overall_verdict.value}"]
        for cls in PulseClass:
            g = self.gof[cls]
            lines.append(
                f"{cls.name.lower()}: sifted={self.sifted_per_class[cls]} chi2={fmt(g.statistic)} "
                f"dof={g.dof} p={fmt(g.p_value)} {'pass' if g.passed else 'FAIL'}"
            )
            for n, e in sorted(self.qber_per_n[cls].items()):
                err, tot = self.qber_counts[cls][n]
                lines.append(f"  e_{n} = {fmt(e)} ({err}/{tot})")
        lines.append(f"qber consistency: {'pass' if self.qber_consistency_verdict else 'FAIL'}")
        lines.append(f"delta (ground truth, detected signal pulses): {fmt(self.delta_empirical)}")
        lines.append(f"delta (ground truth, detected decoy pulses): {fmt(self.delta_empirical_decoy)}")
        lines.append(f"delta bound mu(1-eta): {fmt(self.delta_bound)}")
        lines.extend(f"finding: {f}" for f in self.findings)
        return "\n".join(lines) + "\n"


def _qber_counts(log: SessionLog, cls: PulseClass) -> dict[int, tuple[int, int]]:
    # Pulse-level error: any click disagreeing with Alice (ambiguous included) counts.
    p, d = log.pulses, log.detection
    matched = (p.cls == cls) & (d.bob_basis == p.basis) & (d.resolved_count >= 1)
    wrong = d.measured_bit != p.bit
    n_class = np.minimum(d.resolved_count, GOF_CLASSES)
    out = {}
    for n in range(1, GOF_CLASSES + 1):
        sel = matched & (n_class == n)
        out[n] = (int(np.count_nonzero(sel & wrong)), int(np.count_nonzero(sel)))
    return out


def tagged_fraction(log: SessionLog, cls: PulseClass | None = PulseClass.SIGNAL) -> float:
    """Ground-truth share of detected pulses (of one class) for which Eve holds a photon."""
    detected = log.detected
    if cls is not None:
        detected = detected & (log.pulses.cls == cls)
    n_detected = int(np.count_nonzero(detected))
    return float(np.count_nonzero(log.channel.tagged & detected)) / n_detected if n_detected else 0.0


def verify(
    sifted: SiftedEvents,
    log: SessionLog,
    config: SessionConfig | None = None,
    significance: float = DEFAULT_SIGNIFICANCE,
) -> VerificationReport:
    """Check photon-number statistics and per-photon-number QBERs for both intensities.

    The resolved-count histogram of each class is tested against Poisson(eta*mu)
    arrivals seen through the receiver's own response (collisions, dark counts).
    The QBER e_n of every populated n-click class must agree with e_1, and the
    signal and decoy values must agree with each other.
    """
    config = config or log.config
    eta = config.channel.eta
    findings: list[str] = []
    histograms, expected, gof, qber_counts, sifted_per_class = {}, {}, {}, {}, {}
    enough = True
    for cls in PulseClass:
        in_cls = log.pulses.cls == cls
        histograms[cls] = CountHistogram.from_samples(log.detection.resolved_count[in_cls])
        expected[cls] = resolved_count_distribution(eta * config.source.mean_for(cls), config.detector)
        sifted_per_class[cls] = int(np.count_nonzero(sifted.cls == cls))
        qber_counts[cls] = _qber_counts(log, cls)
        if sifted_per_class[cls] < MIN_SIFTED_PER_CLASS or histograms[cls].total < 100:
            enough = False
            findings.append(f"{cls.name.lower()}: only {sifted_per_class[cls]} sifted events")
            gof[cls] = GofResult(float("nan"), 0, float("nan"), significance)
            continue
        gof[cls] = chi_square_gof(histograms[cls], expected[cls], significance)
        if not gof[cls].passed:
            findings.append(f"{cls.name.lower()}: photon-number statistics abnormal (p={fmt(gof[cls].p_value)})")

    # Dark clicks add errors Bob can predict from his own e_dark; they are removed
    # before e_n values are compared (background-free photon QBERs).
    terms: dict[PulseClass, dict[int, tuple[int, int, float, float]]] = {}
    for cls in PulseClass:
        bg = background_contribution(histograms[cls].total, eta * config.source.mean_for(cls), config.detector)
        terms[cls] = {n: (err, tot, *bg.get(n, (0.0, 0.0))) for n, (err, tot) in qber_counts[cls].items()}

    def rate(t: tuple[int, int, float, float]) -> str:
        return fmt(t[0] / t[1])

    consistent = True
    for cls in PulseClass:
        first = terms[cls][1]
        for n, term in terms[cls].items():
            if n == 1 or term[1] < MIN_QBER_EVENTS or first[1] < MIN_QBER_EVENTS:
                continue
            if not corrected_rates_agree(term, first, QBER_SIGMAS):
                consistent = False
                findings.append(f"{cls.name.lower()}: e_{n}={rate(term)} differs from e_1={rate(first)}")
    for n in range(1, GOF_CLASSES + 1):
        sig, dec = terms[PulseClass.SIGNAL][n], terms[PulseClass.DECOY][n]
        if sig[1] >= MIN_QBER_EVENTS and dec[1] >= MIN_QBER_EVENTS and not corrected_rates_agree(sig, dec, QBER_SIGMAS):
            consistent = False
            findings.append(f"e_{n} differs between signal ({rate(sig)}) and decoy ({rate(dec)})")

    delta_emp = {cls: tagged_fraction(log, cls) for cls in PulseClass}

    if not enough:
        verdict = Verdict.INCONCLUSIVE
    elif consistent and all(g.passed for g in gof.values()):
        verdict = Verdict.SECURE
    else:
        verdict = Verdict.EAVESDROPPER_DETECTED
    return VerificationReport(
        histograms=histograms,
        expected=expected,
        gof=gof,
        qber_counts=qber_counts,
        qber_consistency_verdict=consistent,
        delta_empirical=delta_emp[PulseClass.SIGNAL],
        delta_empirical_decoy=delta_emp[PulseClass.DECOY],
        delta_bound=delta_bound(config.source.mu, eta),
        sifted_per_class=sifted_per_class,
        overall_verdict=verdict,
        findings=findings,
    )


def extract_raw_key(sifted: SiftedEvents, report: VerificationReport) -> tuple[np.ndarray, np.ndarray]:
    """Aligned (Alice, Bob) raw key from single-click sifted events of both classes."""
    if report.overall_verdict is not Verdict.SECURE:
        raise KeyRefusedError(f"session verdict is {report.overall_verdict.value}; no key extracted")
    keep = ~sifted.key_discard
    return sifted.alice_bit[keep].copy(), sifted.bob_bit[keep].copy()
