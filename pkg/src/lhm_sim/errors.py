"""Exception hierarchy shared by all lhm_sim modules."""

from __future__ import annotations


class LhmError(Exception):
    """Base class for domain errors; the CLI maps these to exit code 1."""

    @property
    def kind(self) -> str:
        return type(self).__name__


class SingularMatrixError(LhmError):
    """Gaussian elimination hit a pivot below the rank tolerance."""


class SingularLiouvillian(LhmError):
    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class NotConverged(LhmError):
    """Integration reached its horizon; ``result`` holds the best state."""

    def __init__(self, message: str, result):
        super().__init__(message)
        self.result = result


class UnstableStep(LhmError):
    pass


class ZeroProbe(LhmError):
    pass


class LocalFieldPole(LhmError):
    pass


class AllUndefined(LhmError):
    pass


class NoFeasiblePoint(LhmError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


class ParseError(LhmError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key


class ValidationError(LhmError, ValueError):
    pass
