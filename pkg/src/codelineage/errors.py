from __future__ import annotations


class CodelineageError(Exception):
    """Base class for all errors raised by this package."""


class DataError(CodelineageError, ValueError):
    """Input data is malformed or violates an invariant."""


class ManifestError(DataError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"manifest {', '.join(where)}: " if where else "manifest: "
        super().__init__(prefix + message)
        self.line = line
        self.field = field


class CycleError(DataError):
    def __init__(self, cycle: list[str]):
        super().__init__("cyclic inheritance: " + " -> ".join(cycle))
        self.cycle = cycle


class PrerequisiteError(CodelineageError):
    """A pipeline stage was run before the artifact it consumes exists."""


class SchemaError(DataError):
    """A serialized artifact has the wrong schema name or version."""
