"""Trent's behavior strategies and attack-effectiveness metrics.

Trent is the authenticator who supplies the GHZ triples.  He can either
play honestly or run the insider attack: rotate Alice's qubit with a
Hadamard, read Alice's qubit and his own in the Z basis, and infer the
encoded bit from whether the two outcomes agree.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import qsim
from .qsim import BellOutcome, Gate, StateVector, XOutcome, ZOutcome

# Qubit indices in the shared (Alice, Trent, Bob) triple.
QUBIT_A, QUBIT_T, QUBIT_B = 0, 1, 2


class StrategyKind(Enum):
    HONEST = "honest"
    ATTACK = "attack"


class AnnouncementPolicy(Enum):
    """What an attacking Trent announces in place of his honest measurement."""

    GENUINE_MEASUREMENT = "genuine"
    UNIFORM_RANDOM = "uniform"


@dataclass(frozen=True)
class TrentStrategy:
    kind: StrategyKind
    announcement_policy: AnnouncementPolicy | None = None

    @classmethod
    def honest(cls) -> "TrentStrategy":
        return cls(kind=StrategyKind.HONEST)

    @classmethod
    def attack(cls, announcement_policy: AnnouncementPolicy | None = None) -> "TrentStrategy":
        return cls(kind=StrategyKind.ATTACK, announcement_policy=announcement_policy)


@dataclass(frozen=True)
class AttackRecord:
    """Trent's raw Z outcomes on (A, T) and the bit he infers from them."""

    z_outcome_a: ZOutcome
    z_outcome_t: ZOutcome
    guessed_bit: int

    def __post_init__(self):
        expected = 0 if self.z_outcome_a == self.z_outcome_t else 1
        if self.guessed_bit != expected:
            raise ValueError("guessed_bit inconsistent with the equal-outcomes rule")


def _measure_and_guess(state: StateVector, rng) -> tuple[AttackRecord, StateVector]:
    state = qsim.apply_gate(state, Gate.HADAMARD, QUBIT_A)
    z_a, state = qsim.measure_z(state, QUBIT_A, rng)
    z_t, state = qsim.measure_z(state, QUBIT_T, rng)
    guess = 0 if z_a == z_t else 1
    return AttackRecord(z_outcome_a=z_a, z_outcome_t=z_t, guessed_bit=guess), state


def attack_p1(state: StateVector, rng) -> tuple[AttackRecord, StateVector]:
    """Intercept-measure-resend attack on the qubit in transit to Bob.

    Returns the attack record and the collapsed three-qubit state; Alice's
    qubit is forwarded to Bob as-is (no re-preparation) and Trent keeps
    his own collapsed qubit for the later public announcement.
    """
    return _measure_and_guess(state, rng)


def attack_p2(
    state: StateVector,
    rng,
    policy: AnnouncementPolicy = AnnouncementPolicy.UNIFORM_RANDOM,
) -> tuple[AttackRecord, BellOutcome, StateVector]:
    """Measurement attack on the qubit Alice legitimately sends to Trent.

    Trent skips the honest Bell measurement, reads (A, T) in the Z basis
    after a Hadamard on A, and announces a Bell outcome per `policy`:
    a uniformly random one by default, or a genuine Bell measurement of
    his collapsed pair.  Also returns the collapsed state Bob still holds
    a share of.
    """
    record, state = _measure_and_guess(state, rng)
    if policy is AnnouncementPolicy.UNIFORM_RANDOM:
        announcement = list(BellOutcome)[rng.integers(4)]
    else:
        announcement, state = qsim.measure_bell(state, QUBIT_A, QUBIT_T, rng)
    return record, announcement, state


def honest_p1_announcement(state: StateVector, rng) -> tuple[XOutcome, StateVector]:
    """Honest Trent's X-basis measurement of his qubit, truthfully published."""
    return qsim.measure_x(state, QUBIT_T, rng)


def attack_metrics(transcripts) -> tuple[float, float, float]:
    """Summarize attacked rounds.

    Returns (guess_accuracy, bob_error_rate, z_equal_fraction) where the
    error rate is taken over check rounds only and the other two over all
    rounds carrying an adversary record.
    """
    transcripts = list(transcripts)
    if not transcripts:
        raise ValueError("attack_metrics needs at least one transcript")
    guessed = [t for t in transcripts if t.adversary_guess is not None]
    if not guessed:
        raise ValueError("no transcript carries an adversary guess")
    guess_accuracy = sum(
        t.adversary_guess == t.sent_bit for t in guessed
    ) / len(guessed)
    z_equal_fraction = sum(
        t.adversary_raw[0] == t.adversary_raw[1] for t in guessed
    ) / len(guessed)
    checks = [t for t in transcripts if t.is_check_bit]
    if checks:
        bob_error_rate = sum(t.decoded_bit != t.sent_bit for t in checks) / len(checks)
    else:
        bob_error_rate = 0.0
    return guess_accuracy, bob_error_rate, z_equal_fraction
