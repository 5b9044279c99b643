"""Gas and scalability accounting.

Gas is modelled: every successful ledger transaction is charged a fixed per-function
constant. The defaults are the averages measured on the Avalanche Fuji testnet.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from .errors import InvalidCosts
from .topology import dimension_count

NANO = Fraction(1, 10**9)

TX_KINDS = ("deploy", "register", "submit", "verify")


@dataclass(frozen=True)
class CostTable:
    gas_deploy: int
    gas_register: int
    gas_submit: int
    gas_verify: int
    price_per_unit: Fraction = Fraction(25)  # nano-currency per gas unit
    currency_to_usd: Fraction = Fraction("22.86")

    def __post_init__(self):
        for name in ("gas_deploy", "gas_register", "gas_submit", "gas_verify"):
            if getattr(self, name) < 0:
                raise InvalidCosts(f"{name} must be non-negative")
        object.__setattr__(self, "price_per_unit", Fraction(self.price_per_unit))
        object.__setattr__(self, "currency_to_usd", Fraction(self.currency_to_usd))

    @property
    def gas_dynamic(self) -> int:
        return self.gas_submit + self.gas_verify

    def gas_for(self, kind: str) -> int:
        return getattr(self, f"gas_{kind}")

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["price_per_unit"] = str(self.price_per_unit)
        d["currency_to_usd"] = str(self.currency_to_usd)
        return d


def default_cost_table() -> CostTable:
    return CostTable(
        gas_deploy=3_372_418,
        gas_register=253_118,
        gas_submit=763_692,
        gas_verify=2_030_995,
    )


def zero_cost_table() -> CostTable:
    return CostTable(0, 0, 0, 0)


def load_cost_table(path: str | Path) -> CostTable:
    """Read a JSON override file.

    Missing keys fall back to the defaults; ``price_per_unit`` and
    ``currency_to_usd`` may be numbers or strings such as ``"22.86"`` or ``"1/3"``.
    """
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise InvalidCosts("cost table must be a JSON object")
    unknown = set(raw) - set(CostTable.__dataclass_fields__)
    if unknown:
        raise InvalidCosts(f"unknown cost table keys: {sorted(unknown)}")
    base = default_cost_table().__dict__ | raw
    try:
        return CostTable(
            gas_deploy=int(base["gas_deploy"]),
            gas_register=int(base["gas_register"]),
            gas_submit=int(base["gas_submit"]),
            gas_verify=int(base["gas_verify"]),
            price_per_unit=Fraction(str(base["price_per_unit"])),
            currency_to_usd=Fraction(str(base["currency_to_usd"])),
        )
    except (TypeError, ValueError) as exc:
        raise InvalidCosts(f"bad cost table value: {exc}") from exc


def per_user_gas(n: int, t: CostTable) -> int:
    """Registration plus one submit and one verify per stage."""
    return t.gas_register + dimension_count(n) * t.gas_dynamic


def system_gas(n: int, t: CostTable) -> int:
    """System-wide total, counting dynamic work once per configuration."""
    return n * t.gas_register + 2 * n * dimension_count(n) * t.gas_dynamic


def averaged_verify_gas(n: int, tx: int | Fraction, tx_plus: int | Fraction) -> Fraction:
    """Mean verify cost when log N of the N calls per stage pay a surcharge."""
    if tx < 0 or tx_plus < tx:
        raise InvalidCosts(f"need tx_plus >= tx >= 0, got tx={tx}, tx_plus={tx_plus}")
    log_n = dimension_count(n)
    return Fraction(log_n * tx_plus + (n - log_n) * tx, n)


def averaged_verify_gas_simplified(n: int, tx: int | Fraction, tx_plus: int | Fraction) -> Fraction:
    if tx < 0 or tx_plus < tx:
        raise InvalidCosts(f"need tx_plus >= tx >= 0, got tx={tx}, tx_plus={tx_plus}")
    return tx + Fraction(dimension_count(n), n) * (tx_plus - tx)


def convert_gas(units: int, t: CostTable) -> tuple[Fraction, Fraction]:
    """Gas units to (native currency, USD)."""
    native = units * t.price_per_unit * NANO
    return native, native * t.currency_to_usd


@dataclass(frozen=True)
class OverheadReport:
    proofs_party: int
    proofs_system: int
    exchanges_party: int
    exchanges_system: int
    keys_party: int
    keys_system: int


def overhead_counts(n: int) -> OverheadReport:
    log_n = dimension_count(n)
    proofs = exchanges = 2 * log_n
    keys = 6 + 2 * log_n  # six per-address slots plus one mailbox key per peer
    return OverheadReport(
        proofs_party=proofs,
        proofs_system=n * proofs,
        exchanges_party=exchanges,
        exchanges_system=n * exchanges,
        keys_party=keys,
        keys_system=n * keys,
    )


class GasMeter:
    """Charges the cost table once per successful transaction."""

    def __init__(self, table: CostTable):
        self.table = table
        self.counts: Counter[str] = Counter()

    def charge(self, kind: str) -> int:
        if kind not in TX_KINDS:
            raise ValueError(f"unknown transaction kind {kind!r}")
        self.counts[kind] += 1
        return self.table.gas_for(kind)

    @property
    def total(self) -> int:
        return sum(self.table.gas_for(k) * c for k, c in self.counts.items())
