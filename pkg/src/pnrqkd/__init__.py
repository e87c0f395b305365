"""Monte Carlo and analytic toolkit for BB84 with weak coherent pulses and a photon-number-resolving receiver."""
from .adversary import Attack, ChannelConfig
from .detector import DetectorConfig
from .protocol import SessionConfig, Verdict, extract_raw_key, run_session, sift, verify
from .source import SourceConfig

__version__ = "0.1.0"

__all__ = [
    "Attack",
    "ChannelConfig",
    "DetectorConfig",
    "SessionConfig",
    "SourceConfig",
    "Verdict",
    "extract_raw_key",
    "run_session",
    "sift",
    "verify",
    "__version__",
]
