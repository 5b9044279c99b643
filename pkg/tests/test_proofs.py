import random
import struct

import pytest
from cryptography.hazmat.primitives import hashes
from hypothesis import given
from hypothesis import strategies as st

from hypersum.crypto import commit
from hypersum.errors import Overflow, StatementViolated
from hypersum.proofs import (
    PROOF_SIZE,
    OracleBackend,
    Proof,
    SummationStatement,
    SummationWitness,
    prove,
    statement_holds,
    verify_proof,
)

KEY = bytes(range(32))


def oracle_digest(value: int, salt: int) -> bytes:
    # separate encoder and hash implementation from the library path
    def be128(v):
        return struct.pack(">QQ", v >> 64, v & (2**64 - 1))

    h = hashes.Hash(hashes.SHA256())
    h.update(be128(value) + be128(salt))
    return h.finalize()


def oracle_holds(w: SummationWitness, s: SummationStatement) -> bool:
    return (
        oracle_digest(w.sum, w.salt) == s.sum_hash
        and oracle_digest(w.sum_pair, w.salt_pair) == s.sum_pair_hash
        and oracle_digest(w.sum + w.sum_pair, w.salt_next) == s.sum_next_hash
    )


def honest(sum_=107, salt=3, sum_pair=30, salt_pair=4, salt_next=5):
    w = SummationWitness(sum_, salt, salt_next, sum_pair, salt_pair)
    s = SummationStatement(commit(sum_, salt), commit(sum_pair, salt_pair), commit(sum_ + sum_pair, salt_next))
    return w, s


def test_honest_witness_holds():
    w, s = honest()
    assert statement_holds(w, s)
    assert oracle_holds(w, s)


def test_perturbed_pair_sum_fails():
    w, s = honest()
    bad = SummationWitness(w.sum, w.salt, w.salt_next, w.sum_pair + 1, w.salt_pair)
    assert not statement_holds(bad, s)


def test_stale_salt_next_fails():
    # correct sums, but the next commitment was made under a different salt
    w = SummationWitness(107, 3, 6, 30, 4)
    s = SummationStatement(oracle_digest(107, 3), oracle_digest(30, 4), oracle_digest(137, 5))
    assert oracle_digest(137, 6) != s.sum_next_hash
    assert not statement_holds(w, s)


def test_overflow_checked():
    w = SummationWitness(2**127, 0, 0, 2**127, 0)
    s = SummationStatement(commit(2**127, 0), commit(2**127, 0), commit(1, 0))
    with pytest.raises(Overflow):
        statement_holds(w, s)
    with pytest.raises(StatementViolated):
        prove(w, s, KEY)


def test_prove_verify_round_trip():
    w, s = honest()
    p = prove(w, s, KEY)
    assert verify_proof(p, s, KEY)
    assert not verify_proof(p, s, bytes(32))


def test_prove_refuses_bad_witness():
    w, s = honest()
    with pytest.raises(StatementViolated):
        prove(SummationWitness(w.sum + 1, w.salt, w.salt_next, w.sum_pair, w.salt_pair), s, KEY)


def test_rebinding_rejected():
    w, s = honest()
    p = prove(w, s, KEY)
    flipped = bytearray(s.sum_next_hash)
    flipped[0] ^= 1
    other = SummationStatement(s.sum_hash, s.sum_pair_hash, bytes(flipped))
    assert not verify_proof(p, other, KEY)
    assert not verify_proof(Proof(p.tag, other), other, KEY)


def test_random_tags_never_accepted():
    w, s = honest()
    rng = random.Random(99)
    accepted = sum(verify_proof(Proof(rng.randbytes(32), s), s, KEY) for _ in range(10_000))
    assert accepted == 0


def test_proof_serialization():
    w, s = honest()
    p = prove(w, s, KEY)
    raw = p.to_bytes()
    assert len(raw) == PROOF_SIZE == 128
    assert Proof.from_bytes(raw) == p
    assert raw[32:] == s.sum_hash + s.sum_pair_hash + s.sum_next_hash


def test_statement_validation():
    with pytest.raises(ValueError):
        SummationStatement(b"short", bytes(32), bytes(32))
    assert not SummationStatement(bytes(32), b"\x01" * 32, b"\x02" * 32).well_formed


def test_backend_wraps_functions():
    backend = OracleBackend(KEY)
    w, s = honest()
    p = backend.prove(w, s)
    assert backend.verify(p, s)
    assert verify_proof(p, s, KEY)
    with pytest.raises(ValueError):
        OracleBackend(b"tiny")


small = st.integers(0, 2**64)


@given(small, small, small, small, small, st.sampled_from(["none", "sum", "salt", "salt_next", "sum_pair", "salt_pair"]))
def test_statement_matches_oracle(a, ra, b, rb, rn, perturb):
    w, s = honest(a, ra, b, rb, rn)
    fields = dict(sum=a, salt=ra, salt_next=rn, sum_pair=b, salt_pair=rb)
    if perturb != "none":
        fields[perturb] += 1
    w = SummationWitness(**fields)
    assert statement_holds(w, s) == oracle_holds(w, s) == (perturb == "none")
