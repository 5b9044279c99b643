"""Hypercube pairing arithmetic for the two parallel aggregation networks.

Configuration A walks the dimensions upward (stage t flips bit t), Configuration B
walks them downward (stage t flips bit d - t - 1). Both are perfect matchings at
every stage, so after d stages every party has folded in every other party.
"""

from __future__ import annotations

import enum

from .errors import NotPowerOfTwo, StageOutOfRange, TooFew


class Config(str, enum.Enum):
    A = "A"  # aggregates masked secrets x + e
    B = "B"  # aggregates masks e

    @classmethod
    def parse(cls, text: str) -> "Config":
        try:
            return cls(text.upper())
        except ValueError:
            raise ValueError(f"unknown configuration {text!r}; expected A or B") from None


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def dimension_count(n_parties: int) -> int:
    """Number of hypercube stages for ``n_parties`` (log2 N)."""
    if n_parties < 2:
        raise TooFew(f"need at least 2 parties, got {n_parties}")
    if not is_power_of_two(n_parties):
        raise NotPowerOfTwo(f"{n_parties} is not a power of two")
    return n_parties.bit_length() - 1


def flipped_bit(t: int, d: int, config: Config) -> int:
    """Bit position exchanged at stage ``t`` in ``config``."""
    if not 0 <= t < d:
        raise StageOutOfRange(f"stage {t} outside [0, {d})")
    return t if config is Config.A else d - t - 1


def peer_index(u: int, t: int, d: int, config: Config) -> int:
    if not 0 <= u < (1 << d):
        raise ValueError(f"party index {u} outside [0, {1 << d})")
    return u ^ (1 << flipped_bit(t, d, config))


def hamming_distance(u: int, v: int) -> int:
    return bin(u ^ v).count("1")


def bits(u: int, d: int) -> str:
    """Fixed-width bit string of a party index, most significant bit first."""
    return format(u, f"0{d}b")


def subcube(u: int, t: int, d: int, config: Config) -> list[int]:
    """Indices whose values party ``u`` has aggregated once stage ``t`` completes."""
    mask = 0
    for s in range(t + 1):
        mask |= 1 << flipped_bit(s, d, config)
    return [v for v in range(1 << d) if (v & ~mask) == (u & ~mask)]
