"""Exception hierarchy.

Every failure mode raised by the library derives from CSCoherentError so
callers (and the CLI) can distinguish library failures from programming
errors. Scenario-file problems carry line numbers.
"""

from __future__ import annotations


class CSCoherentError(Exception):
    """Base class for all library errors."""


class ParameterError(CSCoherentError):
    """A model, schedule, or state parameter is out of its allowed range."""


class ScheduleError(CSCoherentError):
    """A parameter schedule is malformed or violates positivity on its span."""


class SpanError(CSCoherentError):
    """A time t falls outside the solved span (including stencil margins)."""


class DegenerateSolutionError(CSCoherentError):
    """The two classical solutions are (numerically) linearly dependent."""


class SingularConfigurationError(CSCoherentError):
    """A coordinate configuration sits on an interaction singularity."""


class UnsupportedConstructionError(CSCoherentError):
    """The requested state construction is not defined for this model."""


class MethodError(CSCoherentError):
    """A numerical method was requested outside its validity domain."""


class InsufficientSamplesError(CSCoherentError):
    """Too few usable samples survived filtering to produce an estimate."""


class ScenarioError(CSCoherentError):
    """One or more problems in a scenario file.

    ``problems`` is a list of human-readable strings, each prefixed with
    the 1-based line number it refers to (or 0 for file-level issues).
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))
