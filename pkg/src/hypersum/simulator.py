"""End-to-end session orchestration over the ledger emulator.

A session deploys the contract, registers every party in index order, closes
registration and then runs one submission phase and one verification phase per
hypercube stage. The order in which parties act inside a phase comes from the
schedule; everything random is derived from the master seed, so a config always
produces the same report byte for byte.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import crypto, party
from .costs import CostTable, OverheadReport, convert_gas, default_cost_table, overhead_counts, per_user_gas, system_gas
from .crypto import derive_rng
from .errors import (
    AlreadyRegistered,
    AlreadyVerified,
    IntegrityFailure,
    ProofRejected,
    ProtocolError,
    SecretOutOfRange,
    SessionComplete,
    UnexpectedSuccess,
)
from .ledger import Ledger, canonical_json
from .party import PartyState, RoundCommitments
from .proofs import Proof
from .topology import Config, dimension_count

logger = logging.getLogger(__name__)

SCHEDULES = ("sequential", "random-permutation-per-phase", "adversarial-reverse")
SCHEDULE_ALIASES = {"random": "random-permutation-per-phase", "reverse": "adversarial-reverse"}

FAULTS = ("forge-proof", "wrong-witness", "double-register", "replay-verify", "tamper-envelope")

REGISTRATION_START = 1


def decimal_str(x: Fraction, places: int = 12) -> str:
    """Fixed-point rendering of a rational, trailing zeros stripped."""
    scaled = round(x * 10**places)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**places)
    frac_s = str(frac).rjust(places, "0").rstrip("0")
    return f"{sign}{whole}.{frac_s}" if frac_s else f"{sign}{whole}"


@dataclass
class SessionConfig:
    n_parties: int
    master_seed: int = 0
    secrets: list[int] | None = None
    schedule: str = "sequential"
    cost_table: CostTable = field(default_factory=default_cost_table)
    secret_bits: int = crypto.SECRET_BITS

    def __post_init__(self):
        self.schedule = SCHEDULE_ALIASES.get(self.schedule, self.schedule)
        if self.schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.schedule!r}; choose from {', '.join(SCHEDULES)}")
        dimension_count(self.n_parties)
        if self.secrets is not None:
            if len(self.secrets) != self.n_parties:
                raise ValueError(f"expected {self.n_parties} secrets, got {len(self.secrets)}")
            limit = 1 << self.secret_bits
            bad = [s for s in self.secrets if not 0 <= s < limit]
            if bad:
                raise SecretOutOfRange(f"secrets outside [0, 2^{self.secret_bits}): {bad}")


@dataclass(frozen=True)
class TranscriptEntry:
    block: int
    kind: str
    party: int
    outcome: str
    stage: int | None = None


@dataclass(frozen=True)
class GasReport:
    tx_counts: dict[str, int]
    charged_total: int
    charged_per_user: int
    per_configuration_total: int
    model_per_user: int
    model_system: int
    charged_native: str
    charged_usd: str


@dataclass(frozen=True)
class SessionReport:
    n_parties: int
    master_seed: int
    schedule: str
    final_sum: int
    per_party_results: list[int]
    stages_executed: int
    final_commitments: list[list[str]]
    gas: GasReport
    overheads: OverheadReport
    overheads_model: OverheadReport
    transcript: list[TranscriptEntry]
    warnings: list[str]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return canonical_json(self.to_dict())


class SessionFailure(ProtocolError):
    """A protocol error raised mid-session, tagged with where it happened."""

    def __init__(self, cause: Exception, position: int, entry: TranscriptEntry, transcript: list[TranscriptEntry]):
        super().__init__(f"{type(cause).__name__} at transaction {position} ({entry.kind} by party {entry.party}): {cause}")
        self.cause = cause
        self.position = position
        self.entry = entry
        self.transcript = transcript


class Session:
    def __init__(self, cfg: SessionConfig):
        self.cfg = cfg
        self.n = cfg.n_parties
        self.d = dimension_count(self.n)
        seed = cfg.master_seed
        self.ledger = Ledger(REGISTRATION_START, self.n, derive_rng(seed, "ledger"), cfg.cost_table)
        self._schedule_rng = derive_rng(seed, "schedule")
        self.rngs = [derive_rng(seed, "party", i) for i in range(self.n)]
        self.addresses = [derive_rng(seed, "address", i).randbytes(20) for i in range(self.n)]
        if cfg.secrets is not None:
            self.secrets = list(cfg.secrets)
        else:
            secret_rng = derive_rng(seed, "secrets")
            self.secrets = [secret_rng.getrandbits(cfg.secret_bits) for _ in range(self.n)]
        self.parties: list[PartyState] = []
        self.secure_numbers: list[party.SecureNumber] = []
        self.transcript: list[TranscriptEntry] = []
        self.proofs_generated = [0] * self.n
        self.envelopes_posted = [0] * self.n
        self._last_verify: dict[int, tuple[Proof, Proof, bytes, bytes]] = {}

    # -- bookkeeping ----------------------------------------------------------

    def _record(self, kind: str, who: int, fn, *args, stage: int | None = None):
        """Run one step, log it, and re-raise failures as :class:`SessionFailure`."""
        block = self.ledger.block_height
        try:
            result = fn(*args)
        except ProtocolError as exc:
            entry = TranscriptEntry(block, kind, who, type(exc).__name__, stage)
            self.transcript.append(entry)
            raise SessionFailure(exc, len(self.transcript) - 1, entry, self.transcript) from exc
        self.transcript.append(TranscriptEntry(block, kind, who, "ok", stage))
        return result

    def _tx(self, kind: str, who: int, fn, *args, stage: int | None = None):
        result = self._record(kind, who, fn, *args, stage=stage)
        self.ledger.advance_block(1)
        return result

    def _advance_to(self, height: int) -> None:
        if height > self.ledger.block_height:
            self.ledger.advance_block(height - self.ledger.block_height)

    def order(self) -> list[int]:
        ids = list(range(self.n))
        if self.cfg.schedule == "adversarial-reverse":
            ids.reverse()
        elif self.cfg.schedule == "random-permutation-per-phase":
            self._schedule_rng.shuffle(ids)
        return ids

    # -- phases ---------------------------------------------------------------

    def register_all(self, duplicate: int | None = None) -> None:
        self._advance_to(REGISTRATION_START)
        for i in range(self.n):
            payload, state, secure = party.create_registration(
                self.secrets[i], self.rngs[i], address=self.addresses[i], secret_bits=self.cfg.secret_bits
            )
            self.parties.append(state)
            self.secure_numbers.append(secure)
            args = (self.addresses[i], payload.c_a, payload.c_b, payload.public_key)
            self._tx("register", i, self.ledger.register, *args)
            if duplicate == i:
                self._tx("register", i, self.ledger.register, *args)

    def close(self) -> None:
        self._advance_to(self.ledger.registration_end + 1)
        self._record("close", -1, self.ledger.close_registration)
        for addr in self.ledger.get_registered():
            i = self.addresses.index(addr)
            self.parties[i] = party.join(self.parties[i], self.ledger.get_registration_id(addr), self.d)

    def submit(self, i: int, tamper: bool = False) -> None:
        p = self.parties[i]
        stage = self.ledger.get_stage()
        peer_a, peer_b = self.ledger.peers(p.address)
        env_a, env_b = party.build_submission(
            p, stage, self.ledger.get_public_key(peer_a), self.ledger.get_public_key(peer_b), self.rngs[i]
        )
        if tamper:
            env_a = env_a[:-1] + bytes([env_a[-1] ^ 0x01])
        self._tx("submit", i, self.ledger.submit, p.address, env_a, env_b, stage=stage)
        self.envelopes_posted[i] += 2

    def prepare_verify(self, i: int) -> party.RoundResult:
        p = self.parties[i]
        led = self.ledger
        peer_a, peer_b = led.peers(p.address)
        own_a, own_b = led.get_commitments(p.address)
        commitments = RoundCommitments(own_a, led.get_commitments(peer_a)[0], own_b, led.get_commitments(peer_b)[1])
        env_a = led.get_peer_envelope(Config.A, peer_a, p.address)
        env_b = led.get_peer_envelope(Config.B, peer_b, p.address)
        return party.process_round(p, env_a, env_b, commitments, led.prover, self.rngs[i])

    def verify(self, i: int, result: party.RoundResult) -> None:
        stage = self.ledger.get_stage()
        args = (self.parties[i].address, result.proof_a, result.proof_b, result.next_c_a, result.next_c_b)
        self._tx("verify", i, self.ledger.verify, *args, stage=stage)
        self.parties[i] = result.state
        self.proofs_generated[i] += 2
        self._last_verify[i] = args[1:]

    def run_stage(self) -> None:
        stage = self.ledger.get_stage()
        for i in self.order():
            self.submit(i)
        for i in self.order():
            result = self._record("process", i, self.prepare_verify, i, stage=stage)
            self.transcript.pop()  # off-chain steps only appear when they fail
            self.verify(i, result)

    # -- reporting ------------------------------------------------------------

    def report(self) -> SessionReport:
        results = [party.extract_result(p) for p in self.parties]
        if len(set(results)) != 1:
            raise ProtocolError(f"parties disagree on the aggregate: {sorted(set(results))}")
        table = self.cfg.cost_table
        counts = dict(sorted(self.ledger.gas.counts.items()))
        charged = self.ledger.gas.total
        exchanges = sum(self.envelopes_posted)
        proofs = sum(self.proofs_generated)
        native, usd = convert_gas(charged, table)
        gas = GasReport(
            tx_counts=counts,
            charged_total=charged,
            charged_per_user=(charged - table.gas_deploy * counts.get("deploy", 0)) // self.n,
            per_configuration_total=counts.get("register", 0) * table.gas_register
            + exchanges * table.gas_submit
            + proofs * table.gas_verify,
            model_per_user=per_user_gas(self.n, table),
            model_system=system_gas(self.n, table),
            charged_native=decimal_str(native),
            charged_usd=decimal_str(usd),
        )
        keys = [self.ledger.storage_keys(a) for a in self.addresses]
        observed = OverheadReport(
            proofs_party=max(self.proofs_generated),
            proofs_system=proofs,
            exchanges_party=max(self.envelopes_posted),
            exchanges_system=exchanges,
            keys_party=max(keys),
            keys_system=sum(keys),
        )
        warnings = []
        if self.n == 2:
            warnings.append(
                "n_parties=2: Configuration A and B pair the same two parties, "
                "so each party's peer can unmask its secret"
            )
        return SessionReport(
            n_parties=self.n,
            master_seed=self.cfg.master_seed,
            schedule=self.cfg.schedule,
            final_sum=results[0],
            per_party_results=results,
            stages_executed=self.ledger.get_stage(),
            final_commitments=[[c.hex() for c in self.ledger.get_commitments(a)] for a in self.addresses],
            gas=gas,
            overheads=observed,
            overheads_model=overhead_counts(self.n),
            transcript=list(self.transcript),
            warnings=warnings,
        )

    def run(self) -> SessionReport:
        self.register_all()
        self.close()
        while not self.ledger.complete:
            self.run_stage()
        logger.debug("session n=%d seed=%d finished after %d transactions", self.n, self.cfg.master_seed, len(self.transcript))
        return self.report()


def run_session(cfg: SessionConfig) -> SessionReport:
    return Session(cfg).run()


# ---------------------------------------------------------------------------
# Fault injection
# ---------------------------------------------------------------------------


EXPECTED_ERRORS: dict[str, tuple[type[Exception], ...]] = {
    "double-register": (AlreadyRegistered,),
    "forge-proof": (ProofRejected,),
    "wrong-witness": (ProofRejected,),
    "replay-verify": (ProofRejected, AlreadyVerified, SessionComplete),
    "tamper-envelope": (IntegrityFailure,),
}


@dataclass(frozen=True)
class FaultReport:
    fault: str
    expected: list[str]
    observed: str
    contained: bool
    position: int
    entry: TranscriptEntry
    transcript: list[TranscriptEntry]

    def to_json(self) -> str:
        return canonical_json(asdict(self))


class _AdversarialSession(Session):
    def __init__(self, cfg: SessionConfig, fault: str, attacker: int = 0):
        super().__init__(cfg)
        self.fault = fault
        self.attacker = attacker
        self._forge_rng = derive_rng(cfg.master_seed, "forgery")

    def submit(self, i: int, tamper: bool = False) -> None:
        tamper = self.fault == "tamper-envelope" and i == self.attacker and self.ledger.get_stage() == 0
        super().submit(i, tamper)

    def verify(self, i: int, result: party.RoundResult) -> None:
        stage = self.ledger.get_stage()
        if i == self.attacker and stage == 0 and self.fault == "forge-proof":
            forged = Proof(self._forge_rng.randbytes(32), result.proof_a.bound_publics)
            result = party.RoundResult(forged, result.proof_b, result.next_c_a, result.next_c_b, result.state)
        elif i == self.attacker and stage == 0 and self.fault == "wrong-witness":
            # claim one more than the true aggregate; no honest proof exists for it
            lie = crypto.commit(result.state.sum_a + 1, result.state.salt_a)
            result = party.RoundResult(result.proof_a, result.proof_b, lie, result.next_c_b, result.state)
        elif i == self.attacker and stage == 1 and self.fault == "replay-verify":
            self._tx("verify", i, self.ledger.verify, self.parties[i].address, *self._last_verify[i], stage=stage)
        super().verify(i, result)
        if i == self.attacker and self.fault == "replay-verify" and self.d == 1:
            self._tx("verify", i, self.ledger.verify, self.parties[i].address, *self._last_verify[i], stage=stage)


def run_adversarial(cfg: SessionConfig, fault: str) -> FaultReport:
    """Run a session with one injected fault by party 0 and report where it was caught.

    Raises :class:`UnexpectedSuccess` if the session completes anyway.
    """
    if fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; choose from {', '.join(FAULTS)}")
    session = _AdversarialSession(cfg, fault)
    try:
        session.register_all(duplicate=0 if fault == "double-register" else None)
        session.close()
        while not session.ledger.complete:
            session.run_stage()
    except SessionFailure as failure:
        expected = EXPECTED_ERRORS[fault]
        return FaultReport(
            fault=fault,
            expected=[e.__name__ for e in expected],
            observed=type(failure.cause).__name__,
            contained=isinstance(failure.cause, expected),
            position=failure.position,
            entry=failure.entry,
            transcript=list(failure.transcript),
        )
    raise UnexpectedSuccess(f"fault {fault!r} was not detected")
