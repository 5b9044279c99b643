"""Hash commitments, sealed-box channel encryption and seeded randomness.

Byte layouts are fixed so that digests and envelopes are reproducible:

* commitment input: 16-byte big-endian value || 16-byte big-endian salt, hashed
  with SHA-256;
* round plaintext: 16-byte big-endian cumulative sum || 16-byte big-endian salt;
* envelope: 32-byte ephemeral X25519 public key || ChaCha20-Poly1305 ciphertext.

Randomness comes from caller-owned :class:`random.Random` instances. That keeps
whole sessions reproducible from one seed; it is a simulation RNG, not a CSPRNG.
"""

from __future__ import annotations

import hashlib
import hmac
import os
import random
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .errors import IntegrityFailure, MalformedPlaintext, Overflow

VALUE_BYTES = 16
VALUE_LIMIT = 1 << (8 * VALUE_BYTES)
SALT_BITS = 53
SECRET_BITS = 32

DIGEST_SIZE = 32
ZERO_DIGEST = bytes(DIGEST_SIZE)  # reserved "empty slot" sentinel

KEY_SIZE = 32
TAG_SIZE = 16
PLAINTEXT_SIZE = 2 * VALUE_BYTES
ENVELOPE_SIZE = KEY_SIZE + PLAINTEXT_SIZE + TAG_SIZE

_HKDF_INFO = b"hypersum/envelope/v1"
_RAW = serialization.Encoding.Raw


def encode_value(value: int) -> bytes:
    if not 0 <= value < VALUE_LIMIT:
        raise Overflow(f"value {value} does not fit in {8 * VALUE_BYTES} bits")
    return value.to_bytes(VALUE_BYTES, "big")


def encode_pair(value: int, salt: int) -> bytes:
    return encode_value(value) + encode_value(salt)


def commit(value: int, salt: int) -> bytes:
    return hashlib.sha256(encode_pair(value, salt)).digest()


def verify_commitment(c: bytes, value: int, salt: int) -> bool:
    try:
        expected = commit(value, salt)
    except Overflow:
        return False
    return hmac.compare_digest(expected, bytes(c))


# ---------------------------------------------------------------------------
# Seeded randomness
# ---------------------------------------------------------------------------


def derive_rng(seed: int, *labels: object) -> random.Random:
    """Independent generator stream for ``(seed, *labels)``.

    Streams are separated by hashing, so adding a label never perturbs
    another stream's sequence.
    """
    material = repr((seed,) + labels).encode()
    return random.Random(int.from_bytes(hashlib.sha256(material).digest(), "big"))


def prng_draw(rng: random.Random) -> int:
    """Uniform draw from [0, 2^53), the salt and mask space."""
    return rng.getrandbits(SALT_BITS)


# ---------------------------------------------------------------------------
# Sealed-box encryption
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KeyPair:
    public_key: bytes
    secret_key: bytes


@dataclass(frozen=True)
class RoundPlaintext:
    cumulative_sum: int
    salt: int

    def to_bytes(self) -> bytes:
        return encode_pair(self.cumulative_sum, self.salt)

    @classmethod
    def from_bytes(cls, data: bytes) -> "RoundPlaintext":
        if len(data) != PLAINTEXT_SIZE:
            raise MalformedPlaintext(f"expected {PLAINTEXT_SIZE} bytes, got {len(data)}")
        return cls(
            int.from_bytes(data[:VALUE_BYTES], "big"),
            int.from_bytes(data[VALUE_BYTES:], "big"),
        )


def _private_key(raw: bytes) -> X25519PrivateKey:
    return X25519PrivateKey.from_private_bytes(bytes(raw))


def _public_bytes(key: X25519PrivateKey) -> bytes:
    return key.public_key().public_bytes(_RAW, serialization.PublicFormat.Raw)


def keygen(rng: random.Random) -> KeyPair:
    sk = _private_key(rng.randbytes(KEY_SIZE))
    return KeyPair(
        public_key=_public_bytes(sk),
        secret_key=sk.private_bytes(_RAW, serialization.PrivateFormat.Raw, serialization.NoEncryption()),
    )


def _cipher(shared: bytes, ephemeral_pk: bytes, recipient_pk: bytes) -> tuple[ChaCha20Poly1305, bytes]:
    okm = HKDF(
        algorithm=hashes.SHA256(),
        length=32 + 12,
        salt=ephemeral_pk + recipient_pk,
        info=_HKDF_INFO,
    ).derive(shared)
    return ChaCha20Poly1305(okm[:32]), okm[32:]


def seal(message: bytes, public_key: bytes, rng: random.Random | None = None) -> bytes:
    """Encrypt ``message`` to ``public_key`` under a fresh ephemeral key.

    Pass ``rng`` to make the ephemeral key reproducible; otherwise the OS
    entropy pool is used.
    """
    raw = rng.randbytes(KEY_SIZE) if rng is not None else os.urandom(KEY_SIZE)
    ephemeral = _private_key(raw)
    ephemeral_pk = _public_bytes(ephemeral)
    shared = ephemeral.exchange(X25519PublicKey.from_public_bytes(bytes(public_key)))
    aead, nonce = _cipher(shared, ephemeral_pk, bytes(public_key))
    return ephemeral_pk + aead.encrypt(nonce, message, None)


def open_sealed(envelope: bytes, secret_key: bytes) -> bytes:
    envelope = bytes(envelope)
    if len(envelope) < KEY_SIZE + TAG_SIZE:
        raise IntegrityFailure("envelope truncated")
    sk = _private_key(secret_key)
    ephemeral_pk = envelope[:KEY_SIZE]
    try:
        shared = sk.exchange(X25519PublicKey.from_public_bytes(ephemeral_pk))
    except ValueError as exc:  # low-order point
        raise IntegrityFailure("invalid ephemeral key") from exc
    aead, nonce = _cipher(shared, ephemeral_pk, _public_bytes(sk))
    try:
        return aead.decrypt(nonce, envelope[KEY_SIZE:], None)
    except InvalidTag as exc:
        raise IntegrityFailure("authentication tag mismatch") from exc


def encrypt(plaintext: RoundPlaintext, public_key: bytes, rng: random.Random | None = None) -> bytes:
    return seal(plaintext.to_bytes(), public_key, rng)


def decrypt(envelope: bytes, secret_key: bytes) -> RoundPlaintext:
    return RoundPlaintext.from_bytes(open_sealed(envelope, secret_key))
