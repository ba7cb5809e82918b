"""Errors raised by the engine.

Checks that must report every failure instead of stopping at the first one
(`scenario.validate`, `context_cost.check_mediation`) return report dicts;
everything else raises one of these.
"""


class ContextCostError(Exception):
    pass


class ValidationError(ContextCostError, ValueError):
    pass


class FormatError(ValidationError):
    """Model file could not be parsed. `path` points at the offending field."""

    def __init__(self, message: str, path: str = "$", line: int = None, column: int = None):
        self.path = path
        self.line = line
        self.column = column
        where = path
        if line is not None:
            where = f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")


class UnknownVariableError(ContextCostError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ModelIncompleteError(ContextCostError, KeyError):
    def __init__(self, context, lam):
        self.context = context
        self.lam = lam
        super().__init__(f"no response defined for context={context!r}, lambda={lam!r}")

    def __str__(self):
        return self.args[0]


class CapacityError(ContextCostError):
    pass


class ScenarioMismatchError(ValidationError):
    pass


class MediationError(ContextCostError):
    """The channel does not reproduce the model's responses."""

    def __init__(self, report: dict):
        self.report = report
        super().__init__(
            f"channel does not mediate the model (max deviation {report.get('max_deviation')})"
        )
