import json
import random
from importlib import resources

import jsonschema
import pytest

from hypersum.costs import system_gas
from hypersum.errors import NotPowerOfTwo, SecretOutOfRange
from hypersum.simulator import FAULTS, SCHEDULES, Session, SessionConfig, SessionFailure, run_adversarial, run_session


def schema(name):
    return json.loads((resources.files("hypersum") / "schemas" / f"{name}.schema.json").read_text())


def test_eight_parties():
    r = run_session(SessionConfig(8, master_seed=1, secrets=list(range(1, 9))))
    assert r.final_sum == 36
    assert r.per_party_results == [36] * 8
    assert r.stages_executed == 3
    assert r.warnings == []


def test_deterministic_reports():
    a = run_session(SessionConfig(4, master_seed=5)).to_json()
    b = run_session(SessionConfig(4, master_seed=5)).to_json()
    assert a == b
    assert a != run_session(SessionConfig(4, master_seed=6)).to_json()


def test_sixteen_random_against_oracle():
    s = Session(SessionConfig(16, master_seed=77))
    report = s.run()
    assert report.final_sum == sum(s.secrets)


def test_two_party_warning():
    r = run_session(SessionConfig(2, secrets=[0, 0]))
    assert r.final_sum == 0
    assert len(r.warnings) == 1


def test_config_validation():
    with pytest.raises(NotPowerOfTwo):
        SessionConfig(12)
    with pytest.raises(ValueError):
        SessionConfig(4, secrets=[1, 2])
    with pytest.raises(SecretOutOfRange):
        SessionConfig(2, secrets=[2**32, 0])
    with pytest.raises(ValueError):
        SessionConfig(2, schedule="chaos")
    assert SessionConfig(2, schedule="reverse").schedule == "adversarial-reverse"


@pytest.mark.parametrize("seed", [0, 3])
def test_schedule_independence(seed):
    reports = [run_session(SessionConfig(16, master_seed=seed, schedule=s)) for s in SCHEDULES]
    assert len({r.final_sum for r in reports}) == 1
    assert len({json.dumps(r.final_commitments) for r in reports}) == 1
    orders = [[(e.kind, e.party) for e in r.transcript] for r in reports]
    assert orders[0] != orders[1] != orders[2]


@pytest.mark.parametrize("n", [2, 4, 8, 32])
def test_transcript_counts(n):
    r = run_session(SessionConfig(n, master_seed=n))
    d = n.bit_length() - 1
    kinds = [e.kind for e in r.transcript]
    assert kinds.count("register") == n
    assert kinds.count("submit") == kinds.count("verify") == n * d
    assert len([k for k in kinds if k != "close"]) == n * (1 + 2 * d)
    for i in range(n):
        assert sum(1 for e in r.transcript if e.kind == "verify" and e.party == i) == d
    assert r.overheads == r.overheads_model
    assert all(e.outcome == "ok" for e in r.transcript)
    blocks = [e.block for e in r.transcript]
    assert blocks == sorted(blocks)


@pytest.mark.parametrize("n", [2, 8, 64])
def test_gas_accounting(n):
    r = run_session(SessionConfig(n, master_seed=1))
    g = r.gas
    assert g.tx_counts == {"deploy": 1, "register": n, "submit": n * (n.bit_length() - 1), "verify": n * (n.bit_length() - 1)}
    assert g.charged_per_user == g.model_per_user
    assert g.per_configuration_total == g.model_system == system_gas(n, SessionConfig(n).cost_table)


def test_report_schema():
    r = run_session(SessionConfig(4, master_seed=2))
    jsonschema.validate(json.loads(r.to_json()), schema("session_report"))


@pytest.mark.parametrize("fault", FAULTS)
@pytest.mark.parametrize("n", [2, 4, 8])
def test_faults_contained(fault, n):
    report = run_adversarial(SessionConfig(n, master_seed=3), fault)
    assert report.contained, report
    assert report.transcript[report.position] == report.entry
    jsonschema.validate(json.loads(report.to_json()), schema("fault_report"))


@pytest.mark.parametrize(
    "fault, observed, kind",
    [
        ("double-register", "AlreadyRegistered", "register"),
        ("forge-proof", "ProofRejected", "verify"),
        ("wrong-witness", "ProofRejected", "verify"),
        ("replay-verify", "ProofRejected", "verify"),
        ("tamper-envelope", "IntegrityFailure", "process"),
    ],
)
def test_fault_locations(fault, observed, kind):
    report = run_adversarial(SessionConfig(8, master_seed=4), fault)
    assert (report.observed, report.entry.kind) == (observed, kind)
    if fault == "double-register":
        assert report.position == 1
    if fault == "tamper-envelope":
        assert report.entry.party == 1  # party 0's A peer at stage 0


def test_session_failure_carries_position():
    s = Session(SessionConfig(4, master_seed=1))
    s.register_all()
    s.close()
    s.submit(0)
    with pytest.raises(SessionFailure) as info:
        s.submit(0)
    assert info.value.entry.outcome == "DuplicateSubmission"
    assert info.value.position == len(s.transcript) - 1


def test_unexpected_fault_name():
    with pytest.raises(ValueError):
        run_adversarial(SessionConfig(2), "bribe-validator")


def test_wide_secrets():
    rng = random.Random(0)
    secrets = [rng.getrandbits(64) for _ in range(8)]
    r = run_session(SessionConfig(8, secrets=secrets, secret_bits=64))
    assert r.final_sum == sum(secrets)
