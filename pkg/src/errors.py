from typing import Any


class WorkbenchError(Exception):
    """Base class for every error raised by the workbench."""

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message
        self.span: tuple[int, int] | None = None

    def at(self, line: int, column: int) -> "WorkbenchError":
        """Attach a source position (line, column) and return self."""
        self.span = (line, column)
        return self

    def __str__(self) -> str:
        if self.span is None:
            return self.message
        return f"{self.span[0]}:{self.span[1]}: {self.message}"


# signature-core


class UnknownName(WorkbenchError):
    def __init__(self, name: str, path: tuple[int, ...] = ()):
        super().__init__(f"Unknown name '{name}' at path {list(path)}")
        self.name = name
        self.path = path


class CompositionMismatch(WorkbenchError):
    def __init__(self, expected: str, found: str, path: tuple[int, ...] = ()):
        super().__init__(
            f"Cannot compose: codomain {found} does not match domain "
            f"{expected} at path {list(path)}"
        )
        self.expected = expected
        self.found = found
        self.path = path


class DaggerUnavailable(WorkbenchError):
    def __init__(self, path: tuple[int, ...] = ()):
        super().__init__(
            f"Dagger used at path {list(path)} but the signature is not "
            "dagger closed"
        )
        self.path = path


class TraceShapeMismatch(WorkbenchError):
    pass


class NotAPermutation(WorkbenchError):
    pass


# diagram-engine


class TypeMismatch(WorkbenchError):
    pass


class NoSuchMatch(WorkbenchError):
    pass


# model-eval


class AlgebraError(WorkbenchError):
    pass


class DimensionMismatch(WorkbenchError):
    pass


class NotASemilattice(WorkbenchError):
    pass


class UnboundGenerator(WorkbenchError):
    def __init__(self, name: str):
        super().__init__(f"Generator '{name}' has no matrix in the model")
        self.name = name


class ConjUnavailable(WorkbenchError):
    pass


class NotInvertible(WorkbenchError):
    pass


class ModelFileError(WorkbenchError):
    pass


# nogo-suite and protocols


class KindMismatch(WorkbenchError):
    pass


class ShapeMismatch(WorkbenchError):
    pass


class PreconditionUnmet(WorkbenchError):
    def __init__(self, message: str, failed: list[str] | None = None):
        super().__init__(message)
        self.failed = failed or []


# cli


class SourceError(WorkbenchError):
    """An error located in DSL source text."""

    kind = "source"

    def __init__(
        self,
        message: str,
        line: int | None = None,
        column: int | None = None,
        expected: set[str] | None = None,
        cause: Any = None,
    ):
        super().__init__(message)
        self.line = line
        self.column = column
        if line is not None:
            self.at(line, column or 0)
        self.expected = expected or set()
        self.cause = cause


class LexError(SourceError):
    kind = "lex"


class ParseError(SourceError):
    kind = "parse"


class ResolveError(SourceError):
    kind = "resolve"
