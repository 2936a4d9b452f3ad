"""Round state machines for the two GHZ direct-communication protocols.

Protocol 1 routes Alice's encoded qubit to Bob: Bob Bell-measures the
(A, B) pair and Trent publishes an X-basis outcome for his qubit.
Protocol 2 routes the qubit to Trent: Trent Bell-measures (A, T) and
publishes, while Bob X-measures his own qubit.  Either way Bob combines
the announcement with his own result to decode the bit.

Two encoding variants exist.  Both map bit 0 to a Hadamard on Alice's
qubit; the original maps bit 1 to X-then-Hadamard, the revised one to
Z-then-Hadamard (the Pauli acts first).  The decode tables coincide for
the two variants; the revision changes only relative signs, which is
exactly what blinds Trent's Z-basis attack without costing Bob anything.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import adversary, qsim
from .adversary import (
    QUBIT_A,
    QUBIT_B,
    QUBIT_T,
    AnnouncementPolicy,
    StrategyKind,
    TrentStrategy,
)
from .qsim import BellOutcome, Gate, StateVector, XOutcome, ZOutcome


class ProtocolId(Enum):
    PROTOCOL_1 = 1
    PROTOCOL_2 = 2


class EncodingVariant(Enum):
    ORIGINAL = "original"
    REVISED = "revised"


# bit -> ordered gate list on qubit A (applied left to right; Pauli first).
ENCODING_RULES = {
    EncodingVariant.ORIGINAL: {
        0: (Gate.HADAMARD,),
        1: (Gate.PAULI_X, Gate.HADAMARD),
    },
    EncodingVariant.REVISED: {
        0: (Gate.HADAMARD,),
        1: (Gate.PAULI_Z, Gate.HADAMARD),
    },
}

_PHI_GROUP = frozenset({BellOutcome.PHI_PLUS, BellOutcome.PSI_MINUS})
_PSI_GROUP = frozenset({BellOutcome.PHI_MINUS, BellOutcome.PSI_PLUS})


@dataclass(frozen=True)
class RoundTranscript:
    """Complete record of one message-bit round."""

    protocol: ProtocolId
    variant: EncodingVariant
    sent_bit: int
    is_check_bit: bool
    trent_announcement: XOutcome | BellOutcome
    bob_measurement: BellOutcome | XOutcome
    decoded_bit: int
    adversary_guess: int | None = None
    adversary_raw: tuple[ZOutcome, ZOutcome] | None = None

    def __post_init__(self):
        ann_type = XOutcome if self.protocol is ProtocolId.PROTOCOL_1 else BellOutcome
        meas_type = BellOutcome if self.protocol is ProtocolId.PROTOCOL_1 else XOutcome
        if not isinstance(self.trent_announcement, ann_type):
            raise ValueError(f"{self.protocol} announces {ann_type.__name__} outcomes")
        if not isinstance(self.bob_measurement, meas_type):
            raise ValueError(f"{self.protocol} has Bob record {meas_type.__name__} outcomes")


@dataclass(frozen=True)
class SessionPlan:
    """Message bits plus interleaved check bits at secret random positions."""

    message_bits: tuple[int, ...]
    check_bits: tuple[int, ...]
    check_positions: frozenset[int]
    check_fraction: float

    @property
    def num_rounds(self) -> int:
        return len(self.message_bits) + len(self.check_bits)

    @classmethod
    def build(cls, message_bits, check_fraction: float, rng) -> "SessionPlan":
        """Draw check bits and positions from a dedicated random stream.

        The check bits are independent uniform bits, uncorrelated with the
        message; positions are sampled without replacement so they stay
        unpredictable until revealed.
        """
        message_bits = tuple(int(b) for b in message_bits)
        if not message_bits:
            raise ValueError("session needs at least one message bit")
        if not 0.0 < check_fraction < 1.0:
            raise ValueError(f"check_fraction must lie in (0,1), got {check_fraction}")
        n_check = max(1, round(len(message_bits) * check_fraction / (1.0 - check_fraction)))
        total = len(message_bits) + n_check
        check_bits = tuple(int(b) for b in rng.integers(0, 2, size=n_check))
        positions = frozenset(
            int(i) for i in rng.choice(total, size=n_check, replace=False)
        )
        return cls(
            message_bits=message_bits,
            check_bits=check_bits,
            check_positions=positions,
            check_fraction=check_fraction,
        )


def encode_bit(variant: EncodingVariant, bit: int, state: StateVector) -> StateVector:
    """Apply Alice's gate sequence for the bit to qubit A."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    for gate in ENCODING_RULES[variant][bit]:
        state = qsim.apply_gate(state, gate, QUBIT_A)
    return state


def decode_p1(variant: EncodingVariant, trent_x: XOutcome, bob_bell: BellOutcome) -> int:
    """Bob's decode rule for protocol 1 (total over both outcome alphabets).

    Identical for both variants: the revision permutes signs inside the
    Bell/X correlation, not which pairs occur for which bit.
    """
    if trent_x is XOutcome.PLUS:
        return 1 if bob_bell in _PHI_GROUP else 0
    return 0 if bob_bell in _PHI_GROUP else 1


def decode_p2(variant: EncodingVariant, trent_bell: BellOutcome, bob_x: XOutcome) -> int:
    """Bob's decode rule for protocol 2 (total over both outcome alphabets)."""
    if trent_bell in _PHI_GROUP:
        return 1 if bob_x is XOutcome.PLUS else 0
    return 0 if bob_x is XOutcome.PLUS else 1


# Encoding is deterministic, so the four post-encoding states are fixed;
# caching them keeps large Monte Carlo sessions cheap.
_ENCODED_CACHE: dict[tuple[EncodingVariant, int], StateVector] = {}


def _encoded_ghz(variant: EncodingVariant, bit: int) -> StateVector:
    key = (variant, bit)
    if key not in _ENCODED_CACHE:
        _ENCODED_CACHE[key] = encode_bit(variant, bit, qsim.make_ghz())
    return _ENCODED_CACHE[key]


def _p1_default_policy(trent: TrentStrategy) -> AnnouncementPolicy:
    return trent.announcement_policy or AnnouncementPolicy.GENUINE_MEASUREMENT


def _p2_default_policy(trent: TrentStrategy) -> AnnouncementPolicy:
    return trent.announcement_policy or AnnouncementPolicy.UNIFORM_RANDOM


def run_round_statevector(
    protocol: ProtocolId,
    variant: EncodingVariant,
    bit: int,
    trent: TrentStrategy,
    rng,
    is_check_bit: bool = False,
) -> RoundTranscript:
    """Execute one full round on a fresh GHZ triple, measurement by
    measurement on the state vector.

    `run_round` draws from the exact precomputed branch distribution of
    the same round and is much faster; this path is the reference it is
    checked against.
    """
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    state = _encoded_ghz(variant, bit)
    guess = None
    raw = None

    if protocol is ProtocolId.PROTOCOL_1:
        if trent.kind is StrategyKind.ATTACK:
            record, state = adversary.attack_p1(state, rng)
            guess, raw = record.guessed_bit, (record.z_outcome_a, record.z_outcome_t)
        bob_bell, state = qsim.measure_bell(state, QUBIT_A, QUBIT_B, rng)
        if (
            trent.kind is StrategyKind.ATTACK
            and _p1_default_policy(trent) is AnnouncementPolicy.UNIFORM_RANDOM
        ):
            announcement = (XOutcome.PLUS, XOutcome.MINUS)[rng.integers(2)]
        else:
            announcement, state = adversary.honest_p1_announcement(state, rng)
        decoded = decode_p1(variant, announcement, bob_bell)
        bob_result = bob_bell
    else:
        if trent.kind is StrategyKind.ATTACK:
            record, announcement, state = adversary.attack_p2(
                state, rng, _p2_default_policy(trent)
            )
            guess, raw = record.guessed_bit, (record.z_outcome_a, record.z_outcome_t)
        else:
            announcement, state = qsim.measure_bell(state, QUBIT_A, QUBIT_T, rng)
        bob_x, state = qsim.measure_x(state, QUBIT_B, rng)
        decoded = decode_p2(variant, announcement, bob_x)
        bob_result = bob_x

    return RoundTranscript(
        protocol=protocol,
        variant=variant,
        sent_bit=bit,
        is_check_bit=is_check_bit,
        trent_announcement=announcement,
        bob_measurement=bob_result,
        decoded_bit=decoded,
        adversary_guess=guess,
        adversary_raw=raw,
    )


@dataclass(frozen=True)
class RoundBranch:
    """One measurement branch of a round, with its exact Born probability."""

    probability: float
    trent_announcement: XOutcome | BellOutcome
    bob_measurement: BellOutcome | XOutcome
    decoded_bit: int
    adversary_guess: int | None
    adversary_raw: tuple[ZOutcome, ZOutcome] | None


_TOL = 1e-15


def _proj(state, vectors, qubits):
    """Nonzero-probability branches of one projective measurement."""
    for outcome, vec in vectors.items():
        prob, post = qsim._project(state, vec, qubits)
        if prob < _TOL:
            continue
        post = StateVector(
            num_qubits=state.num_qubits,
            amplitudes=post / np.sqrt(np.sum(np.abs(post) ** 2)),
        )
        yield outcome, prob, post


_Z_VECTORS = {
    ZOutcome.ZERO: np.array([1, 0], dtype=complex),
    ZOutcome.ONE: np.array([0, 1], dtype=complex),
}


def _enumerate_branches(
    protocol: ProtocolId, variant: EncodingVariant, bit: int, trent: TrentStrategy
) -> list[RoundBranch]:
    """Exact enumeration of every measurement branch of one round."""
    state = _encoded_ghz(variant, bit)
    branches: list[RoundBranch] = []

    def add(prob, announcement, measurement, guess=None, raw=None):
        decoded = (
            decode_p1(variant, announcement, measurement)
            if protocol is ProtocolId.PROTOCOL_1
            else decode_p2(variant, announcement, measurement)
        )
        branches.append(
            RoundBranch(
                probability=prob,
                trent_announcement=announcement,
                bob_measurement=measurement,
                decoded_bit=decoded,
                adversary_guess=guess,
                adversary_raw=raw,
            )
        )

    if trent.kind is StrategyKind.HONEST:
        if protocol is ProtocolId.PROTOCOL_1:
            for bell, p1, post in _proj(state, qsim.BELL_VECTORS, (QUBIT_A, QUBIT_B)):
                for x, p2 in qsim.x_probabilities(post, QUBIT_T).items():
                    if p2 > _TOL:
                        add(p1 * p2, x, bell)
        else:
            for bell, p1, post in _proj(state, qsim.BELL_VECTORS, (QUBIT_A, QUBIT_T)):
                for x, p2 in qsim.x_probabilities(post, QUBIT_B).items():
                    if p2 > _TOL:
                        add(p1 * p2, bell, x)
        return branches

    rotated = qsim.apply_gate(state, Gate.HADAMARD, QUBIT_A)
    for z_a, p_a, post_a in _proj(rotated, _Z_VECTORS, (QUBIT_A,)):
        for z_t, p_t, post_t in _proj(post_a, _Z_VECTORS, (QUBIT_T,)):
            guess = 0 if z_a == z_t else 1
            raw = (z_a, z_t)
            p_zz = p_a * p_t
            if protocol is ProtocolId.PROTOCOL_1:
                policy = _p1_default_policy(trent)
                for bell, p_b, post_b in _proj(
                    post_t, qsim.BELL_VECTORS, (QUBIT_A, QUBIT_B)
                ):
                    if policy is AnnouncementPolicy.UNIFORM_RANDOM:
                        for x in (XOutcome.PLUS, XOutcome.MINUS):
                            add(p_zz * p_b * 0.5, x, bell, guess, raw)
                    else:
                        for x, p_x in qsim.x_probabilities(post_b, QUBIT_T).items():
                            if p_x > _TOL:
                                add(p_zz * p_b * p_x, x, bell, guess, raw)
            else:
                policy = _p2_default_policy(trent)
                if policy is AnnouncementPolicy.UNIFORM_RANDOM:
                    for bell in BellOutcome:
                        for x, p_x in qsim.x_probabilities(post_t, QUBIT_B).items():
                            if p_x > _TOL:
                                add(p_zz * 0.25 * p_x, bell, x, guess, raw)
                else:
                    for bell, p_b, post_b in _proj(
                        post_t, qsim.BELL_VECTORS, (QUBIT_A, QUBIT_T)
                    ):
                        for x, p_x in qsim.x_probabilities(post_b, QUBIT_B).items():
                            if p_x > _TOL:
                                add(p_zz * p_b * p_x, bell, x, guess, raw)
    return branches


_DISTRIBUTION_CACHE: dict[tuple, tuple[tuple[float, ...], tuple[RoundBranch, ...]]] = {}


def round_distribution(
    protocol: ProtocolId, variant: EncodingVariant, bit: int, trent: TrentStrategy
) -> tuple[tuple[float, ...], tuple[RoundBranch, ...]]:
    """Cumulative probabilities and branches of one round, cached.

    Branch probabilities sum to 1 up to float rounding; the cumulative
    tuple supports bisection sampling.
    """
    key = (protocol, variant, bit, trent)
    if key not in _DISTRIBUTION_CACHE:
        branches = _enumerate_branches(protocol, variant, bit, trent)
        total = sum(b.probability for b in branches)
        if abs(total - 1.0) > 1e-9:
            raise AssertionError(f"branch probabilities sum to {total}")
        cumulative = tuple(np.cumsum([b.probability for b in branches]))
        _DISTRIBUTION_CACHE[key] = (cumulative, tuple(branches))
    return _DISTRIBUTION_CACHE[key]


def run_round(
    protocol: ProtocolId,
    variant: EncodingVariant,
    bit: int,
    trent: TrentStrategy,
    rng,
    is_check_bit: bool = False,
) -> RoundTranscript:
    """Execute one full round on a fresh GHZ triple.

    Samples the round's exact joint outcome distribution, precomputed once
    per (protocol, variant, bit, strategy) by enumerating every measurement
    branch of the state vector; distributionally identical to
    `run_round_statevector` but orders of magnitude faster in bulk runs.
    """
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    cumulative, branches = round_distribution(protocol, variant, bit, trent)
    branch = branches[min(bisect_right(cumulative, rng.random()), len(branches) - 1)]
    return RoundTranscript(
        protocol=protocol,
        variant=variant,
        sent_bit=bit,
        is_check_bit=is_check_bit,
        trent_announcement=branch.trent_announcement,
        bob_measurement=branch.bob_measurement,
        decoded_bit=branch.decoded_bit,
        adversary_guess=branch.adversary_guess,
        adversary_raw=branch.adversary_raw,
    )


def run_session(
    protocol: ProtocolId,
    variant: EncodingVariant,
    plan: SessionPlan,
    trent: TrentStrategy,
    rng,
    abort_threshold: float = 0.02,
    noise_probability: float = 0.0,
) -> tuple[list[RoundTranscript], float, bool]:
    """Run one round per planned bit and evaluate the check-bit error rate.

    `noise_probability` is an optional classical channel-noise knob: each
    decoded bit is independently flipped with that probability, exercising
    the abort path without touching the quantum model.
    """
    if plan.num_rounds == 0:
        raise ValueError("empty session plan")

    transcripts = []
    message_iter = iter(plan.message_bits)
    check_iter = iter(plan.check_bits)
    for index in range(plan.num_rounds):
        is_check = index in plan.check_positions
        bit = next(check_iter) if is_check else next(message_iter)
        transcript = run_round(protocol, variant, bit, trent, rng, is_check_bit=is_check)
        if noise_probability > 0.0 and rng.random() < noise_probability:
            transcript = RoundTranscript(
                protocol=transcript.protocol,
                variant=transcript.variant,
                sent_bit=transcript.sent_bit,
                is_check_bit=transcript.is_check_bit,
                trent_announcement=transcript.trent_announcement,
                bob_measurement=transcript.bob_measurement,
                decoded_bit=1 - transcript.decoded_bit,
                adversary_guess=transcript.adversary_guess,
                adversary_raw=transcript.adversary_raw,
            )
        transcripts.append(transcript)

    checks = [t for t in transcripts if t.is_check_bit]
    errors = sum(t.decoded_bit != t.sent_bit for t in checks)
    error_rate = errors / len(checks) if checks else 0.0
    abort = error_rate > abort_threshold
    return transcripts, error_rate, abort


def extract_message(transcripts: list[RoundTranscript], abort: bool) -> list[int] | None:
    """Bob's decoded message bits, available only when the session passed."""
    if abort:
        return None
    return [t.decoded_bit for t in transcripts if not t.is_check_bit]


def honest_correspondence_table(
    protocol: ProtocolId, variant: EncodingVariant
) -> list[tuple[object, object, int, float]]:
    """Exact Born-probability enumeration of honest rounds.

    Returns (announcement, bob_measurement, bit, probability) rows for every
    outcome pair with nonzero probability.  Raises if the induced decode map
    is not single-valued.
    """
    rows = []
    seen: dict[tuple, int] = {}
    for bit in (0, 1):
        state = encode_bit(variant, bit, qsim.make_ghz())
        if protocol is ProtocolId.PROTOCOL_1:
            pairs = _enumerate(state, (QUBIT_A, QUBIT_B), QUBIT_T)
            pairs = [(x, bell, p) for (bell, x, p) in pairs]
        else:
            pairs = [
                (bell, x, p)
                for (bell, x, p) in _enumerate(state, (QUBIT_A, QUBIT_T), QUBIT_B)
            ]
        for announcement, measurement, prob in pairs:
            key = (announcement, measurement)
            if key in seen and seen[key] != bit:
                raise ValueError(f"decode map not single-valued at {key}")
            seen[key] = bit
            rows.append((announcement, measurement, bit, prob))
    return rows


def _enumerate(state: StateVector, bell_pair, x_qubit):
    """All (bell, x, probability) branches of a Bell-then-X measurement."""
    branches = []
    for bell, bell_vec in qsim.BELL_VECTORS.items():
        p_bell, post = qsim._project(state, bell_vec, bell_pair)
        if p_bell < 1e-15:
            continue
        post = StateVector(
            num_qubits=state.num_qubits,
            amplitudes=post / np.sqrt(np.sum(np.abs(post) ** 2)),
        )
        for x, p_x in qsim.x_probabilities(post, x_qubit).items():
            if p_x < 1e-15:
                continue
            branches.append((bell, x, p_bell * p_x))
    return branches
