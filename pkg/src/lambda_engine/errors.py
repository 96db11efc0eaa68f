"""Exception hierarchy shared by all modules."""


class EngineError(Exception):
    """Base class for every error raised by lambda_engine."""


class DomainError(EngineError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateParametersError(EngineError, ValueError):
    """Parameters make a normalising denominator or linear system vanish."""


class SingularParametersError(EngineError, ValueError):
    """A closed-form expression hits a vanishing denominator."""

    def __init__(self, message, params=None):
        super().__init__(message)
        self.params = params


class StiffnessError(EngineError, RuntimeError):
    """Adaptive step size underflowed or the step budget was exhausted."""

    def __init__(self, message, t=None, h=None, steps=None):
        super().__init__(message)
        self.t = t
        self.h = h
        self.steps = steps


class ConvergenceError(EngineError, RuntimeError):
    """Steady-state iteration reached t_max without meeting its threshold."""

    def __init__(self, message, last_delta=None, t=None):
        super().__init__(message)
        self.last_delta = last_delta
        self.t = t


class ResolutionError(EngineError, ValueError):
    """An orbit is sampled too coarsely for the requested harmonics."""


class UndefinedEfficiencyError(EngineError, ZeroDivisionError):
    """Efficiency denominator Qdot_h + P_c vanishes."""


class ConfigError(EngineError, ValueError):
    """Malformed or invalid configuration document."""

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column
