"""Exception hierarchy shared by every layer of the protocol."""

from __future__ import annotations


class ProtocolError(Exception):
    """Base class for all protocol failures."""


# topology
class NotPowerOfTwo(ProtocolError, ValueError):
    pass


class TooFew(ProtocolError, ValueError):
    pass


class StageOutOfRange(ProtocolError, ValueError):
    pass


# crypto
class IntegrityFailure(ProtocolError):
    """Envelope could not be authenticated (wrong key, tampering, truncation)."""


class MalformedPlaintext(ProtocolError):
    pass


class Overflow(ProtocolError, ArithmeticError):
    pass


# proofs
class StatementViolated(ProtocolError):
    """The witness does not satisfy the summation statement."""


# ledger
class LedgerError(ProtocolError):
    pass


class InvalidWindow(LedgerError, ValueError):
    pass


class AlreadyRegistered(LedgerError):
    pass


class WindowNotOpen(LedgerError):
    pass


class WindowClosed(LedgerError):
    pass


class WindowStillOpen(LedgerError):
    pass


class InvalidCommitment(LedgerError):
    pass


class NotRegistered(LedgerError):
    pass


class RegistrationOpen(LedgerError):
    pass


class DuplicateSubmission(LedgerError):
    pass


class MissingPeerMessage(LedgerError):
    pass


class AlreadyVerified(LedgerError):
    pass


class ProofRejected(LedgerError):
    pass


class SessionComplete(LedgerError):
    pass


class UnknownAddress(LedgerError, KeyError):
    pass


# party
class SecretOutOfRange(ProtocolError, ValueError):
    pass


class SessionIncomplete(ProtocolError):
    pass


# cost model
class InvalidCosts(ProtocolError, ValueError):
    pass


# simulator
class UnexpectedSuccess(ProtocolError):
    """An injected fault was not caught by the protocol."""
