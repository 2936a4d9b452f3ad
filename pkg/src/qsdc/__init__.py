"""Simulator for GHZ-based quantum direct communication with an
authenticator, including the insider attacks and the sign-flip encoding
revision that defeats them."""

from .adversary import AnnouncementPolicy, AttackRecord, StrategyKind, TrentStrategy
from .harness import RunConfig, RunReport, run_experiment, verify_identities
from .protocol import (
    EncodingVariant,
    ProtocolId,
    RoundTranscript,
    SessionPlan,
    run_round,
    run_session,
)
from .qsim import (
    BellOutcome,
    Gate,
    StateVector,
    XOutcome,
    ZOutcome,
    apply_gate,
    fidelity,
    make_ghz,
    measure_bell,
    measure_x,
    measure_z,
)

__all__ = [
    "AnnouncementPolicy",
    "AttackRecord",
    "BellOutcome",
    "EncodingVariant",
    "Gate",
    "ProtocolId",
    "RoundTranscript",
    "RunConfig",
    "RunReport",
    "SessionPlan",
    "StateVector",
    "StrategyKind",
    "TrentStrategy",
    "XOutcome",
    "ZOutcome",
    "apply_gate",
    "fidelity",
    "make_ghz",
    "measure_bell",
    "measure_x",
    "measure_z",
    "run_experiment",
    "run_round",
    "run_session",
    "verify_identities",
]
