"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class FairProvError(Exception):
    """Base class for every error raised by fairprov."""


# vocabulary
class UnknownPrefix(FairProvError):
    pass


class UnknownProperty(FairProvError):
    pass


# linked-data documents
class MalformedInput(FairProvError):
    pass


class UnsupportedJsonLdFeature(FairProvError):
    pass


class BlankNodeUnsupported(UnsupportedJsonLdFeature):
    pass


class ConflictingFunctionalValue(FairProvError):
    def __init__(self, node: str, predicate: str, values: list) -> None:
        self.node = node
        self.predicate = predicate
        self.values = values
        super().__init__(
            f"{node}: single-valued property {predicate} has conflicting values {values!r}"
        )


class IncompatibleBase(FairProvError):
    pass


# identifiers
class InvalidIri(FairProvError):
    pass


class InvalidPath(FairProvError):
    pass


class InvalidOrcid(FairProvError):
    pass


class InvalidDoi(FairProvError):
    pass


# capture
class MalformedManifest(FairProvError):
    pass


class MissingRequiredField(MalformedManifest):
    def __init__(self, field: str) -> None:
        self.field = field
        super().__init__(f"missing required field: {field}")


class MalformedReport(FairProvError):
    pass


class MissingTimestamp(MalformedReport):
    pass


class LayoutViolation(FairProvError):
    def __init__(self, path: str, message: str) -> None:
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


class PluginFailure(FairProvError):
    def __init__(self, name: str, cause: BaseException, target: str | None = None) -> None:
        self.name = name
        self.cause = cause
        self.target = target
        where = f" on {target}" if target else ""
        super().__init__(f"plugin {name!r} failed{where}: {cause!r}")


# consolidation
class ConsolidationConflict(FairProvError):
    pass


class MissingMandatoryEdge(FairProvError):
    pass


# query engine
class QuerySyntaxError(FairProvError):
    def __init__(self, message: str, line: int, col: int) -> None:
        self.line = line
        self.col = col
        super().__init__(f"{message} (line {line}, column {col})")


class UnsupportedFeature(FairProvError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unsupported query feature: {name}")


class EvaluationError(FairProvError):
    def __init__(self, message: str, row: dict | None = None) -> None:
        self.row = row
        if row:
            message = f"{message} (row: {row})"
        super().__init__(message)


class QueryTypeError(EvaluationError, TypeError):
    pass


# harness
class OutputNotEmpty(FairProvError):
    pass


# publish
class EmptySelection(FairProvError):
    pass


class TemplateError(FairProvError):
    pass


class DepositError(FairProvError):
    pass


class AuthError(DepositError):
    pass


class ProtocolError(DepositError):
    pass


class DigestMismatch(DepositError):
    pass
