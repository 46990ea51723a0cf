"""Exception types raised across the package."""

from __future__ import annotations


class SymbolActError(Exception):
    """Base class for all package errors."""


# -- symbolic system -------------------------------------------------------


class InvalidSymbolText(SymbolActError, ValueError):
    """Symbol text is empty after canonicalization."""


class DuplicateRuleError(SymbolActError):
    def __init__(self, existing_rule_id: int):
        super().__init__(f"rule duplicates existing rule {existing_rule_id}")
        self.existing_rule_id = existing_rule_id


class ConclusionInPremisesError(SymbolActError, ValueError):
    pass


class EmptyPremisesError(SymbolActError, ValueError):
    pass


class UnknownConclusionError(SymbolActError, KeyError):
    pass


class MismatchedConclusionError(SymbolActError, ValueError):
    pass


class FrozenSystemError(SymbolActError):
    pass


# -- oracle gateway --------------------------------------------------------


class OracleError(SymbolActError):
    pass


class MalformedResponseError(OracleError, ValueError):
    """The oracle answered, but not in a shape the parser accepts."""

    def __init__(self, message: str, raw: str):
        super().__init__(f"{message}: {raw!r}")
        self.raw = raw


class TransportError(OracleError):
    pass


class ReplayMissError(OracleError, KeyError):
    pass


class ScriptedMissError(OracleError, KeyError):
    pass


class CacheConflictError(OracleError):
    pass


# -- grounding / inference / evaluation -------------------------------------


class CoverageMissError(SymbolActError, KeyError):
    pass


class TreeMismatchError(SymbolActError, ValueError):
    pass


class MissingProbabilityError(SymbolActError, KeyError):
    pass


class UnresolvableActivityError(SymbolActError, KeyError):
    pass


class KeyMismatchError(SymbolActError, ValueError):
    pass


class MissingScoreTableError(SymbolActError, ValueError):
    pass
