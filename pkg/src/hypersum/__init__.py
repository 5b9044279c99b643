"""Trustless private summation over two masked hypercube networks.

Parties mask their secrets, aggregate masked values and masks along two
hypercube schedules, and prove every partial sum against hash commitments
held by an emulated smart contract. The difference of the two aggregates is
the sum of the secrets.
"""

from .costs import CostTable, OverheadReport, default_cost_table, overhead_counts, per_user_gas, system_gas
from .crypto import commit, verify_commitment
from .ledger import Ledger, deploy
from .proofs import OracleBackend, Proof, SummationStatement, SummationWitness, statement_holds
from .simulator import SessionConfig, SessionReport, run_adversarial, run_session
from .topology import Config, dimension_count, hamming_distance, peer_index

__all__ = [
    "Config",
    "CostTable",
    "Ledger",
    "OracleBackend",
    "OverheadReport",
    "Proof",
    "SessionConfig",
    "SessionReport",
    "SummationStatement",
    "SummationWitness",
    "commit",
    "default_cost_table",
    "deploy",
    "dimension_count",
    "hamming_distance",
    "overhead_counts",
    "peer_index",
    "per_user_gas",
    "run_adversarial",
    "run_session",
    "statement_holds",
    "system_gas",
    "verify_commitment",
]
