"""Summation statement and a pluggable prove/verify backend.

The statement says: "I know (sum, salt), (sum_pair, salt_pair) and salt_next
such that the three public digests commit to sum, sum_pair and sum + sum_pair".

:class:`OracleBackend` stands in for a SNARK. ``prove`` checks the constraints
in the clear and, only if they hold, emits an HMAC over the public inputs keyed
by a per-deployment secret. Verification needs nothing but the proof and the
publics, and nobody without the secret can mint a tag that verifies. Anyone who
holds the backend object can prove, and the witness is not hidden from it, so
this is a completeness/soundness model, not zero knowledge.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from typing import Protocol

from .crypto import DIGEST_SIZE, VALUE_LIMIT, ZERO_DIGEST, commit
from .errors import Overflow, StatementViolated

TAG_SIZE = 32
PROOF_SIZE = TAG_SIZE + 3 * DIGEST_SIZE


@dataclass(frozen=True)
class SummationStatement:
    sum_hash: bytes
    sum_pair_hash: bytes
    sum_next_hash: bytes

    def __post_init__(self):
        for name in ("sum_hash", "sum_pair_hash", "sum_next_hash"):
            digest = getattr(self, name)
            if len(digest) != DIGEST_SIZE:
                raise ValueError(f"{name} must be {DIGEST_SIZE} bytes")

    @property
    def well_formed(self) -> bool:
        return ZERO_DIGEST not in (self.sum_hash, self.sum_pair_hash, self.sum_next_hash)

    def to_bytes(self) -> bytes:
        return self.sum_hash + self.sum_pair_hash + self.sum_next_hash

    @classmethod
    def from_bytes(cls, data: bytes) -> "SummationStatement":
        if len(data) != 3 * DIGEST_SIZE:
            raise ValueError(f"expected {3 * DIGEST_SIZE} bytes, got {len(data)}")
        return cls(data[:32], data[32:64], data[64:])


@dataclass(frozen=True)
class SummationWitness:
    sum: int
    salt: int
    salt_next: int
    sum_pair: int
    salt_pair: int


@dataclass(frozen=True)
class Proof:
    tag: bytes
    bound_publics: SummationStatement

    def to_bytes(self) -> bytes:
        return self.tag + self.bound_publics.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Proof":
        if len(data) != PROOF_SIZE:
            raise ValueError(f"expected {PROOF_SIZE} bytes, got {len(data)}")
        return cls(data[:TAG_SIZE], SummationStatement.from_bytes(data[TAG_SIZE:]))

    def hex(self) -> str:
        return self.to_bytes().hex()


def statement_holds(w: SummationWitness, s: SummationStatement) -> bool:
    total = w.sum + w.sum_pair
    if total >= VALUE_LIMIT:
        raise Overflow(f"sum {total} exceeds 128 bits")
    return (
        commit(w.sum, w.salt) == s.sum_hash
        and commit(w.sum_pair, w.salt_pair) == s.sum_pair_hash
        and commit(total, w.salt_next) == s.sum_next_hash
    )


class ProofBackend(Protocol):
    def prove(self, w: SummationWitness, s: SummationStatement) -> Proof: ...

    def verify(self, p: Proof, s: SummationStatement) -> bool: ...


def _tag(session_key: bytes, s: SummationStatement) -> bytes:
    return hmac.new(session_key, b"hypersum/proof/v1" + s.to_bytes(), hashlib.sha256).digest()


def prove(w: SummationWitness, s: SummationStatement, session_key: bytes) -> Proof:
    try:
        ok = statement_holds(w, s)
    except Overflow as exc:
        raise StatementViolated(str(exc)) from exc
    if not ok:
        raise StatementViolated("witness does not open the public commitments")
    return Proof(_tag(session_key, s), s)


def verify_proof(p: Proof, s: SummationStatement, session_key: bytes) -> bool:
    if p.bound_publics != s or len(p.tag) != TAG_SIZE:
        return False
    return hmac.compare_digest(p.tag, _tag(session_key, s))


class OracleBackend:
    """Default backend: constraint check plus keyed authenticator."""

    def __init__(self, session_key: bytes):
        if len(session_key) < 16:
            raise ValueError("session key too short")
        self._key = bytes(session_key)

    def prove(self, w: SummationWitness, s: SummationStatement) -> Proof:
        return prove(w, s, self._key)

    def verify(self, p: Proof, s: SummationStatement) -> bool:
        return verify_proof(p, s, self._key)
