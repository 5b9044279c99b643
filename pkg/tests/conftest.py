from __future__ import annotations

from dataclasses import dataclass, field

import pytest

from hypersum import party
from hypersum.crypto import derive_rng
from hypersum.ledger import Ledger
from hypersum.party import PartyState, RoundCommitments
from hypersum.topology import Config, dimension_count


@dataclass
class Cohort:
    """Ledger plus honest parties, registered and closed, driven by hand."""

    ledger: Ledger
    parties: list[PartyState]
    rngs: list
    secrets: list[int]
    secure_numbers: list = field(default_factory=list)

    def index_of(self, addr: bytes) -> int:
        return next(i for i, p in enumerate(self.parties) if p.address == addr)

    def submit_all(self) -> None:
        stage = self.ledger.get_stage()
        for i, p in enumerate(self.parties):
            peer_a, peer_b = self.ledger.peers(p.address)
            envs = party.build_submission(
                p, stage, self.ledger.get_public_key(peer_a), self.ledger.get_public_key(peer_b), self.rngs[i]
            )
            self.ledger.submit(p.address, *envs)

    def round(self, i: int) -> party.RoundResult:
        p = self.parties[i]
        led = self.ledger
        peer_a, peer_b = led.peers(p.address)
        own_a, own_b = led.get_commitments(p.address)
        commitments = RoundCommitments(own_a, led.get_commitments(peer_a)[0], own_b, led.get_commitments(peer_b)[1])
        return party.process_round(
            p,
            led.get_peer_envelope(Config.A, peer_a, p.address),
            led.get_peer_envelope(Config.B, peer_b, p.address),
            commitments,
            led.prover,
            self.rngs[i],
        )

    def verify(self, i: int, result: party.RoundResult):
        outcome = self.ledger.verify(
            self.parties[i].address, result.proof_a, result.proof_b, result.next_c_a, result.next_c_b
        )
        self.parties[i] = result.state
        return outcome

    def run_stage(self, order=None) -> None:
        self.submit_all()
        for i in order or range(len(self.parties)):
            self.verify(i, self.round(i))


def make_cohort(n: int, seed: int = 0, secrets: list[int] | None = None) -> Cohort:
    ledger = Ledger(1, n, derive_rng(seed, "ledger"))
    ledger.advance_block(1)
    rng = derive_rng(seed, "secrets")
    secrets = secrets if secrets is not None else [rng.getrandbits(32) for _ in range(n)]
    parties, rngs, numbers = [], [], []
    for i, x in enumerate(secrets):
        prng = derive_rng(seed, "party", i)
        payload, state, number = party.create_registration(x, prng, address=bytes([i + 1]) * 20)
        ledger.register(state.address, payload.c_a, payload.c_b, payload.public_key)
        ledger.advance_block(1)
        parties.append(state)
        rngs.append(prng)
        numbers.append(number)
    ledger.advance_block(ledger.registration_end + 1 - ledger.block_height)
    d = ledger.close_registration()
    assert d == dimension_count(n)
    parties = [party.join(p, ledger.get_registration_id(p.address), d) for p in parties]
    return Cohort(ledger, parties, rngs, secrets, numbers)


@pytest.fixture
def cohort4() -> Cohort:
    return make_cohort(4, seed=11)


# -- acceptance reporting -----------------------------------------------------

_CRITERIA: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    number, title = marker.args
    _CRITERIA.setdefault(number, (title, []))[1].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcomes = _CRITERIA[number]
        status = "PASS" if outcomes and all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
