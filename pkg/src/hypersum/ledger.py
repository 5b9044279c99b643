"""Deterministic emulation of the aggregation smart contract.

The contract keeps eight user-facing mappings (registration ids, two live
commitment maps, two temp commitment maps, public keys and two encrypted
mailboxes) plus stage counters and a registration window measured in blocks.
Transactions are applied strictly one after another; a failing transaction
raises and leaves the state untouched, like a reverted call.

Guards beyond the printed contract: submit/verify require registration to be
closed, each party may submit and verify at most once per stage, verify needs
both peer envelopes to be present, and zero commitments are refused.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass

from .costs import CostTable, GasMeter, default_cost_table
from .crypto import DIGEST_SIZE, ZERO_DIGEST, encode_value
from .errors import (
    AlreadyRegistered,
    AlreadyVerified,
    DuplicateSubmission,
    InvalidCommitment,
    InvalidWindow,
    LedgerError,
    MissingPeerMessage,
    NotPowerOfTwo,
    NotRegistered,
    ProofRejected,
    RegistrationOpen,
    SessionComplete,
    TooFew,
    UnknownAddress,
    WindowClosed,
    WindowNotOpen,
    WindowStillOpen,
)
from .proofs import OracleBackend, Proof, ProofBackend, SummationStatement
from .topology import Config, dimension_count, peer_index

MAX_HEIGHT = 2**64 - 1

MAPPINGS = (
    "registration_ids",
    "commitments_a",
    "commitments_b",
    "temp_commitments_a",
    "temp_commitments_b",
    "public_keys",
    "secret_messages_a",
    "secret_messages_b",
)


@dataclass(frozen=True)
class VerifyOutcome:
    stage: int
    stage_advanced: bool
    stashed_a: bool  # True when the next commitment went to the temp slot
    stashed_b: bool


def _check_commitment(c: bytes, what: str) -> bytes:
    c = bytes(c)
    if len(c) != DIGEST_SIZE:
        raise InvalidCommitment(f"{what} must be {DIGEST_SIZE} bytes")
    if c == ZERO_DIGEST:
        raise InvalidCommitment(f"{what} is the reserved zero digest")
    return c


class Ledger:
    def __init__(
        self,
        registration_start: int,
        registration_limit: int,
        rng: random.Random,
        cost_table: CostTable | None = None,
        backend: ProofBackend | None = None,
    ):
        if registration_start < 0 or registration_limit < 1:
            raise InvalidWindow(f"invalid window start={registration_start} limit={registration_limit}")
        self.registration_start = registration_start
        self.registration_limit = registration_limit
        self.block_height = 0

        self.registration_ids: dict[bytes, int] = {}
        self.registered_users: list[bytes] = []
        self.commitments_a: dict[bytes, bytes] = {}
        self.commitments_b: dict[bytes, bytes] = {}
        self.temp_commitments_a: dict[bytes, bytes] = {}
        self.temp_commitments_b: dict[bytes, bytes] = {}
        self.public_keys: dict[bytes, bytes] = {}
        self.secret_messages_a: dict[tuple[bytes, bytes], bytes] = {}
        self.secret_messages_b: dict[tuple[bytes, bytes], bytes] = {}

        self.registration_closed = False
        self.current_stage = 0
        self.max_stage = 0
        self.proofs_verified_count = 0
        self._submitted: set[bytes] = set()
        self._verified: set[bytes] = set()

        self.session_proving_secret = rng.randbytes(32)
        self.backend: ProofBackend = backend or OracleBackend(self.session_proving_secret)
        self.gas = GasMeter(cost_table or default_cost_table())
        self.gas.charge("deploy")

    # -- clock ---------------------------------------------------------------

    @property
    def registration_end(self) -> int:
        return self.registration_start + self.registration_limit

    def advance_block(self, n: int = 1) -> int:
        if n < 1:
            raise ValueError("must advance by at least one block")
        self.block_height = min(self.block_height + n, MAX_HEIGHT)
        return self.block_height

    # -- transactions --------------------------------------------------------

    def register(self, sender: bytes, c_a: bytes, c_b: bytes, pk: bytes) -> int:
        if self.registration_closed or self.block_height > self.registration_end:
            raise WindowClosed(f"registration closed at block {self.registration_end}")
        if self.block_height < self.registration_start:
            raise WindowNotOpen(f"registration opens at block {self.registration_start}")
        if self.public_keys.get(sender):
            raise AlreadyRegistered(f"{sender.hex()} is already registered")
        c_a = _check_commitment(c_a, "commitment A")
        c_b = _check_commitment(c_b, "commitment B")
        if not pk:
            raise LedgerError("empty public key")

        rid = len(self.registered_users)
        self.registration_ids[sender] = rid
        self.commitments_a[sender] = c_a
        self.commitments_b[sender] = c_b
        self.temp_commitments_a[sender] = ZERO_DIGEST
        self.temp_commitments_b[sender] = ZERO_DIGEST
        self.public_keys[sender] = bytes(pk)
        self.registered_users.append(sender)
        self.gas.charge("register")
        return rid

    def close_registration(self) -> int:
        if self.block_height <= self.registration_end:
            raise WindowStillOpen(f"window runs until block {self.registration_end}")
        if self.registration_closed:
            raise WindowClosed("registration already closed")
        n = len(self.registered_users)
        try:
            self.max_stage = dimension_count(n)
        except TooFew as exc:
            raise NotPowerOfTwo(f"{n} registrants: {exc}") from exc
        self.current_stage = 0
        self.registration_closed = True
        return self.max_stage

    def _require_active(self, sender: bytes) -> None:
        if not self.registration_closed:
            raise RegistrationOpen("registration has not been closed")
        if sender not in self.registration_ids:
            raise NotRegistered(f"{sender.hex()} is not registered")
        if self.current_stage >= self.max_stage:
            raise SessionComplete("all stages have completed")

    def peers(self, sender: bytes) -> tuple[bytes, bytes]:
        """Addresses of ``sender``'s A and B peers at the current stage."""
        rid = self.registration_ids[sender]
        a = peer_index(rid, self.current_stage, self.max_stage, Config.A)
        b = peer_index(rid, self.current_stage, self.max_stage, Config.B)
        return self.registered_users[a], self.registered_users[b]

    def submit(self, sender: bytes, envelope_a: bytes, envelope_b: bytes) -> tuple[bytes, bytes]:
        self._require_active(sender)
        if sender in self._submitted:
            raise DuplicateSubmission(f"{sender.hex()} already submitted in stage {self.current_stage}")
        peer_a, peer_b = self.peers(sender)
        self.secret_messages_a[(sender, peer_a)] = bytes(envelope_a)
        self.secret_messages_b[(sender, peer_b)] = bytes(envelope_b)
        self._submitted.add(sender)
        self.gas.charge("submit")
        return peer_a, peer_b

    def statements(self, sender: bytes, next_c_a: bytes, next_c_b: bytes) -> tuple[SummationStatement, SummationStatement]:
        peer_a, peer_b = self.peers(sender)
        return (
            SummationStatement(self.commitments_a[sender], self.commitments_a[peer_a], bytes(next_c_a)),
            SummationStatement(self.commitments_b[sender], self.commitments_b[peer_b], bytes(next_c_b)),
        )

    def verify(
        self,
        sender: bytes,
        proof_a: Proof,
        proof_b: Proof,
        next_c_a: bytes,
        next_c_b: bytes,
    ) -> VerifyOutcome:
        self._require_active(sender)
        if sender in self._verified:
            raise AlreadyVerified(f"{sender.hex()} already verified in stage {self.current_stage}")
        peer_a, peer_b = self.peers(sender)
        if (peer_a, sender) not in self.secret_messages_a or (peer_b, sender) not in self.secret_messages_b:
            raise MissingPeerMessage(f"peer envelopes for {sender.hex()} not yet posted")
        next_c_a = _check_commitment(next_c_a, "next commitment A")
        next_c_b = _check_commitment(next_c_b, "next commitment B")

        statement_a, statement_b = self.statements(sender, next_c_a, next_c_b)
        if not (self.backend.verify(proof_a, statement_a) and self.backend.verify(proof_b, statement_b)):
            raise ProofRejected(f"proof from {sender.hex()} rejected at stage {self.current_stage}")

        stage = self.current_stage
        self.proofs_verified_count += 1
        self._verified.add(sender)
        advanced = self.proofs_verified_count == len(self.registered_users)
        if advanced:
            self.current_stage += 1
            self.proofs_verified_count = 0
            self._submitted.clear()
            self._verified.clear()

        stashed_a = self._swap(self.commitments_a, self.temp_commitments_a, sender, peer_a, next_c_a)
        stashed_b = self._swap(self.commitments_b, self.temp_commitments_b, sender, peer_b, next_c_b)
        self.gas.charge("verify")
        return VerifyOutcome(stage, advanced, stashed_a, stashed_b)

    @staticmethod
    def _swap(live: dict, temp: dict, sender: bytes, peer: bytes, next_c: bytes) -> bool:
        # first verifier of a pair parks its commitment; the second promotes both
        if temp[peer] == ZERO_DIGEST:
            temp[sender] = next_c
            return True
        live[sender] = next_c
        live[peer] = temp[peer]
        temp[peer] = ZERO_DIGEST
        return False

    # -- read accessors ------------------------------------------------------

    def _known(self, addr: bytes) -> bytes:
        if addr not in self.registration_ids:
            raise UnknownAddress(addr.hex())
        return addr

    def get_public_key(self, addr: bytes) -> bytes:
        return self.public_keys[self._known(addr)]

    def get_commitments(self, addr: bytes) -> tuple[bytes, bytes]:
        self._known(addr)
        return self.commitments_a[addr], self.commitments_b[addr]

    def get_registration_id(self, addr: bytes) -> int:
        return self.registration_ids[self._known(addr)]

    def get_peer_envelope(self, config: Config, peer_addr: bytes, recipient_addr: bytes) -> bytes:
        mailbox = self.secret_messages_a if Config(config) is Config.A else self.secret_messages_b
        try:
            return mailbox[(self._known(peer_addr), self._known(recipient_addr))]
        except KeyError:
            raise MissingPeerMessage(
                f"no {Config(config).value} envelope from {peer_addr.hex()} to {recipient_addr.hex()}"
            ) from None

    def get_stage(self) -> int:
        return self.current_stage

    def get_registered(self) -> list[bytes]:
        return list(self.registered_users)

    @property
    def prover(self) -> ProofBackend:
        """Proving handle handed to parties, the analog of a published proving key."""
        return self.backend

    @property
    def complete(self) -> bool:
        return self.registration_closed and self.current_stage == self.max_stage

    # -- export --------------------------------------------------------------

    def storage_keys(self, addr: bytes) -> int:
        """Mapping keys owned by ``addr`` (per-address slots plus outgoing mailbox entries)."""
        self._known(addr)
        per_address = sum(
            addr in m
            for m in (
                self.registration_ids,
                self.commitments_a,
                self.commitments_b,
                self.temp_commitments_a,
                self.temp_commitments_b,
                self.public_keys,
            )
        )
        outgoing = sum(s == addr for s, _ in self.secret_messages_a) + sum(s == addr for s, _ in self.secret_messages_b)
        return per_address + outgoing

    def snapshot(self) -> dict:
        def hexmap(m: dict[bytes, bytes]) -> dict[str, str]:
            return {k.hex(): v.hex() for k, v in m.items()}

        def mailbox(m: dict[tuple[bytes, bytes], bytes]) -> dict[str, dict[str, str]]:
            out: dict[str, dict[str, str]] = {}
            for (sender, recipient), env in m.items():
                out.setdefault(sender.hex(), {})[recipient.hex()] = env.hex()
            return out

        return {
            "block_height": self.block_height,
            "registration_start": self.registration_start,
            "registration_limit": self.registration_limit,
            "registration_closed": self.registration_closed,
            "current_stage": self.current_stage,
            "max_stage": self.max_stage,
            "proofs_verified_count": self.proofs_verified_count,
            "verifier_id": hashlib.sha256(self.session_proving_secret).hexdigest(),
            "registered_users": [u.hex() for u in self.registered_users],
            "registration_ids": {k.hex(): v for k, v in self.registration_ids.items()},
            "commitments_a": hexmap(self.commitments_a),
            "commitments_b": hexmap(self.commitments_b),
            "temp_commitments_a": hexmap(self.temp_commitments_a),
            "temp_commitments_b": hexmap(self.temp_commitments_b),
            "public_keys": hexmap(self.public_keys),
            "secret_messages_a": mailbox(self.secret_messages_a),
            "secret_messages_b": mailbox(self.secret_messages_b),
        }

    def snapshot_json(self) -> str:
        return canonical_json(self.snapshot())


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


class MalformedSnapshot(ValueError):
    pass


def load_snapshot(text: str) -> dict:
    try:
        snap = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedSnapshot(f"snapshot is not valid JSON: {exc}") from exc
    if not isinstance(snap, dict):
        raise MalformedSnapshot("snapshot must be a JSON object")
    missing = [k for k in (*MAPPINGS, "registered_users", "current_stage") if k not in snap]
    if missing:
        raise MalformedSnapshot(f"snapshot lacks {', '.join(missing)}")
    return snap


def scan_snapshot(snapshot: dict, values: list[int]) -> list[tuple[int, str]]:
    """Locate the canonical 16-byte encoding of any of ``values`` in a snapshot.

    Returns ``(value, json_path)`` pairs; object keys are searched as well as
    string leaves.
    """
    needles = {encode_value(v).hex(): v for v in values}
    hits: list[tuple[int, str]] = []

    def check(text: str, path: str) -> None:
        low = text.lower()
        for needle, v in needles.items():
            if needle in low:
                hits.append((v, path))

    def walk(node, path: str) -> None:
        if isinstance(node, dict):
            for k in sorted(node):
                check(str(k), f"{path}/{k}#key")
                walk(node[k], f"{path}/{k}")
        elif isinstance(node, list):
            for i, item in enumerate(node):
                walk(item, f"{path}/{i}")
        elif isinstance(node, str):
            check(node, path)

    walk(snapshot, "")
    return hits


def deploy(
    registration_start: int,
    registration_limit: int,
    rng: random.Random,
    cost_table: CostTable | None = None,
) -> Ledger:
    return Ledger(registration_start, registration_limit, rng, cost_table)
