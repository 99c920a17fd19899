"""Error hierarchy shared by all privreq modules.

Every error carries a stable machine-readable ``code`` (snake_case of the
class name) so the CLI and the HTTP service can map errors uniformly.
"""

import re


class PrivReqError(Exception):
    """Base class for all domain errors raised by this package."""

    @property
    def code(self) -> str:
        name = type(self).__name__
        return re.sub(r"(?<!^)(?=[A-Z])", "_", name).lower()


# --- parsing / validation -------------------------------------------------

class ParseError(PrivReqError):
    """Input document is not syntactically valid."""


class ValidationError(PrivReqError):
    """A document parsed but violates a declared invariant."""

    def __init__(self, rule: str, detail: str = ""):
        self.rule = rule
        self.detail = detail
        msg = rule if not detail else f"{rule}: {detail}"
        super().__init__(msg)


class NotFound(PrivReqError):
    """A referenced entity does not exist."""


class UnknownGoal(PrivReqError):
    pass


class MissingField(PrivReqError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing field: {name}")


# --- ingestion ------------------------------------------------------------

class NetworkError(PrivReqError):
    pass


class AuthError(PrivReqError):
    pass


class FormatError(PrivReqError):
    """A connector cannot parse a page it received."""


# --- store ----------------------------------------------------------------

class IoError(PrivReqError):
    pass


class LockHeld(PrivReqError):
    def __init__(self, holder_pid: int | None = None, stale: bool = False):
        self.holder_pid = holder_pid
        self.stale = stale
        detail = f" (held by pid {holder_pid})" if holder_pid else ""
        hint = "; holder is gone, pass force to reclaim" if stale else ""
        super().__init__(f"project directory is locked by another writer{detail}{hint}")


# --- annotation -----------------------------------------------------------

class EmptyCorpus(PrivReqError):
    pass


class InvalidPlan(PrivReqError):
    pass


class NotAssigned(PrivReqError):
    pass


class UnknownRequirement(PrivReqError):
    pass


class NoDisagreement(PrivReqError):
    pass


class InvalidCombination(PrivReqError):
    pass


class UnresolvedDisagreements(PrivReqError):
    def __init__(self, count: int):
        self.count = count
        super().__init__(f"{count} unresolved disagreement(s)")


class InsufficientCoders(PrivReqError):
    pass


# --- reliability ----------------------------------------------------------

class NoVariation(PrivReqError):
    """Expected disagreement is zero; the coefficient is undefined."""


class InsufficientData(PrivReqError):
    pass


class RaggedMatrix(PrivReqError):
    pass


class DegenerateAgreement(PrivReqError):
    """All ratings fall in a single category; kappa is undefined."""


# --- classifier -----------------------------------------------------------

class EmbeddingLoadError(PrivReqError):
    pass


class EmptyDocument(PrivReqError):
    pass


class MissingGold(PrivReqError):
    def __init__(self, issue_key):
        self.issue_key = issue_key
        super().__init__(f"no gold labels for issue {issue_key}")


# --- stats ----------------------------------------------------------------

class InvalidConfidence(PrivReqError):
    pass


class SampleTooLarge(PrivReqError):
    pass


class Unresolved(PrivReqError):
    pass


class EmptySample(PrivReqError):
    pass


# --- reporting / service ---------------------------------------------------

class EmptyGold(PrivReqError):
    pass


class BindError(PrivReqError):
    pass
