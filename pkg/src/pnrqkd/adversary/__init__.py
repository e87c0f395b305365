from .blocking import (
    EveStrategySolution,
    InfeasibilityReport,
    blocking_cascade,
    check_blocking_infeasibility,
    forward_distribution,
    solve_blocking_distribution,
)
from .channel import (
    Attack,
    ChannelBatch,
    ChannelConfig,
    ChannelOutcome,
    SubstituteModel,
    attack_pns,
    attack_pnsr,
    transmit_batch,
    transmit_lossy,
)
from .unitary import (
    QubitJointState,
    apply_cmp,
    apply_si,
    cmp_error_probabilities,
    si_error_probability,
    si_unitary,
)

__all__ = [
    "Attack",
    "ChannelBatch",
    "ChannelConfig",
    "ChannelOutcome",
    "EveStrategySolution",
    "InfeasibilityReport",
    "QubitJointState",
    "SubstituteModel",
    "apply_cmp",
    "apply_si",
    "attack_pns",
    "attack_pnsr",
    "blocking_cascade",
    "check_blocking_infeasibility",
    "cmp_error_probabilities",
    "forward_distribution",
    "si_error_probability",
    "si_unitary",
    "solve_blocking_distribution",
    "transmit_batch",
    "transmit_lossy",
]
