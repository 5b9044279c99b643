"""Client-side agent logic.

A party masks its secret ``x`` with a random ``e`` and runs two aggregations
side by side: Configuration A over ``x + e`` and Configuration B over ``e``.
After every stage it holds the partial sums of its current subcube in both
networks, re-committed under fresh salts. Once all stages are done the masks
cancel: ``sum_a - sum_b`` is the sum of every party's ``x``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from . import crypto
from .crypto import KeyPair, RoundPlaintext, commit, prng_draw
from .errors import SecretOutOfRange, SessionIncomplete, StatementViolated
from .proofs import Proof, ProofBackend, SummationStatement, SummationWitness, statement_holds
from .topology import Config

MAX_SECRET_BITS = 64


@dataclass(frozen=True)
class PartyState:
    address: bytes
    secret_x: int
    mask_e: int
    sum_a: int
    sum_b: int
    salt_a: int
    salt_b: int
    keypair: KeyPair
    registration_id: int | None = None
    dimension: int | None = None
    stages_completed: int = 0

    @property
    def commitment_a(self) -> bytes:
        return commit(self.sum_a, self.salt_a)

    @property
    def commitment_b(self) -> bytes:
        return commit(self.sum_b, self.salt_b)


@dataclass(frozen=True)
class RegistrationPayload:
    c_a: bytes
    c_b: bytes
    public_key: bytes


@dataclass(frozen=True)
class SecureNumber:
    """Portable record of the registration-time values, rendered as four hex fields."""

    masked_secret: int
    mask: int
    salt_masked: int
    salt_mask: int

    def encode(self) -> str:
        return ":".join(crypto.encode_value(v).hex() for v in self.fields())

    def fields(self) -> tuple[int, int, int, int]:
        return (self.masked_secret, self.mask, self.salt_masked, self.salt_mask)

    @classmethod
    def decode(cls, text: str) -> "SecureNumber":
        parts = text.strip().split(":")
        if len(parts) != 4 or any(p != p.lower() or len(p) != 2 * crypto.VALUE_BYTES for p in parts):
            raise ValueError("secure number must be four 32-digit lowercase hex fields joined by ':'")
        return cls(*(int(p, 16) for p in parts))

    def __str__(self) -> str:
        return self.encode()


@dataclass(frozen=True)
class RoundCommitments:
    """Live ledger commitments a party needs to state its round."""

    own_a: bytes
    peer_a: bytes
    own_b: bytes
    peer_b: bytes


@dataclass(frozen=True)
class RoundResult:
    proof_a: Proof
    proof_b: Proof
    next_c_a: bytes
    next_c_b: bytes
    state: PartyState


def create_registration(
    x: int,
    rng: random.Random,
    *,
    address: bytes,
    secret_bits: int = crypto.SECRET_BITS,
    mask: int | None = None,
    salts: tuple[int, int] | None = None,
) -> tuple[RegistrationPayload, PartyState, SecureNumber]:
    """Draw a mask, two salts and a keypair for secret ``x``.

    ``mask`` and ``salts`` override the random draws (the generator still
    advances the same way, so seeded runs stay aligned).
    """
    if not 0 < secret_bits <= MAX_SECRET_BITS:
        raise ValueError(f"secret_bits must be in (0, {MAX_SECRET_BITS}]")
    if not 0 <= x < (1 << secret_bits):
        raise SecretOutOfRange(f"secret {x} outside [0, 2^{secret_bits})")

    e = prng_draw(rng)
    r_a = prng_draw(rng)
    r_b = prng_draw(rng)
    if mask is not None:
        e = mask
    if salts is not None:
        r_a, r_b = salts
    keypair = crypto.keygen(rng)

    state = PartyState(
        address=bytes(address),
        secret_x=x,
        mask_e=e,
        sum_a=x + e,
        sum_b=e,
        salt_a=r_a,
        salt_b=r_b,
        keypair=keypair,
    )
    payload = RegistrationPayload(state.commitment_a, state.commitment_b, keypair.public_key)
    return payload, state, SecureNumber(x + e, e, r_a, r_b)


def join(p: PartyState, registration_id: int, dimension: int) -> PartyState:
    """Record the index assigned at registration and the stage count fixed at close."""
    return replace(p, registration_id=registration_id, dimension=dimension)


def build_submission(
    p: PartyState,
    stage: int,
    pk_peer_a: bytes,
    pk_peer_b: bytes,
    rng: random.Random | None = None,
) -> tuple[bytes, bytes]:
    # stage is not encoded; the ledger decides whether the submission is timely
    del stage
    env_a = crypto.encrypt(RoundPlaintext(p.sum_a, p.salt_a), pk_peer_a, rng)
    env_b = crypto.encrypt(RoundPlaintext(p.sum_b, p.salt_b), pk_peer_b, rng)
    return env_a, env_b


def _fold(
    config: Config,
    stage: int,
    own_sum: int,
    own_salt: int,
    peer: RoundPlaintext,
    own_c: bytes,
    peer_c: bytes,
    salt_next: int,
    prover: ProofBackend,
) -> tuple[int, bytes, Proof]:
    sum_next = own_sum + peer.cumulative_sum
    next_c = commit(sum_next, salt_next)
    witness = SummationWitness(own_sum, own_salt, salt_next, peer.cumulative_sum, peer.salt)
    statement = SummationStatement(own_c, peer_c, next_c)
    if not statement_holds(witness, statement):
        raise StatementViolated(
            f"configuration {config.value}, stage {stage}: peer values do not match ledger commitments"
        )
    return sum_next, next_c, prover.prove(witness, statement)


def process_round(
    p: PartyState,
    env_from_peer_a: bytes,
    env_from_peer_b: bytes,
    commitments: RoundCommitments,
    prover: ProofBackend,
    rng: random.Random,
) -> RoundResult:
    """Decrypt both peer sums, fold them in, and prove both folds.

    The returned state carries the new sums and salts; ``p`` itself is left
    untouched, so a failure mid-round leaves nothing half-applied.
    """
    stage = p.stages_completed
    peer_a = crypto.decrypt(env_from_peer_a, p.keypair.secret_key)
    peer_b = crypto.decrypt(env_from_peer_b, p.keypair.secret_key)
    salt_next_a = prng_draw(rng)
    salt_next_b = prng_draw(rng)

    sum_a, next_c_a, proof_a = _fold(
        Config.A, stage, p.sum_a, p.salt_a, peer_a, commitments.own_a, commitments.peer_a, salt_next_a, prover
    )
    sum_b, next_c_b, proof_b = _fold(
        Config.B, stage, p.sum_b, p.salt_b, peer_b, commitments.own_b, commitments.peer_b, salt_next_b, prover
    )
    state = replace(
        p,
        sum_a=sum_a,
        sum_b=sum_b,
        salt_a=salt_next_a,
        salt_b=salt_next_b,
        stages_completed=stage + 1,
    )
    return RoundResult(proof_a, proof_b, next_c_a, next_c_b, state)


def extract_result(p: PartyState) -> int:
    if p.dimension is None or p.stages_completed < p.dimension:
        raise SessionIncomplete(f"{p.stages_completed} of {p.dimension} stages completed")
    return p.sum_a - p.sum_b
