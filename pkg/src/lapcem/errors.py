class LapcemError(Exception):
    pass


class InputShapeError(LapcemError, ValueError):
    pass


class ParseError(LapcemError, ValueError):
    pass


class DomainError(LapcemError, ValueError):
    pass


class LifecycleError(LapcemError, RuntimeError):
    pass


class ConfigError(LapcemError, ValueError):
    pass


class CatalogError(ConfigError):
    pass


class NumericalFailure(LapcemError, ArithmeticError):
    """Raised when an eigensolve or a training step produces an unusable result.

    ``best_estimate`` carries whatever partial value was available (the
    eigenvalue estimate for a non-converged solve, the loss for a training
    step), or ``None``.
    """

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
