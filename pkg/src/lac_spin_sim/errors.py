"""Exception hierarchy shared by the simulation modules."""


class SimulationError(Exception):
    """Base class for all errors raised by lac_spin_sim."""


class ConvergenceError(SimulationError):
    """The step count hit its cap before the observables settled."""

    def __init__(self, message, previous=None, last=None, n_steps=None):
        super().__init__(message)
        self.previous = previous
        self.last = last
        self.n_steps = n_steps


class SteadyStateError(SimulationError):
    """The periodic fixed point is not unique (degenerate eigenvalue 1)."""


class InsufficientResolutionError(SimulationError, ValueError):
    pass


class UndefinedPhaseError(SimulationError, ValueError):
    pass


class IntegratorError(SimulationError):
    pass


class ConfigError(SimulationError, ValueError):
    """Raised for malformed run configurations; carries line and key if known."""

    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key
