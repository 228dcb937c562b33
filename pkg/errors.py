"""
Error types for the adiabat toolkit

Every failure a pipeline can report derives from AdiabatError so the command
modules can map it to an exit code. Bad arguments to pure helpers still raise
ValueError.
"""


class AdiabatError(RuntimeError):
    """Base class for simulation and experiment failures"""


class GridMismatchError(AdiabatError):
    """Two fields were combined on different grids (caller bug)"""


class NormalizationError(AdiabatError):
    """A field violates its normalization or boundary invariant"""


class DegenerateLevelsError(AdiabatError):
    """Two eigenvalues are too close for the requested quantity to be defined"""

    def __init__(self, message: str, levels: tuple = ()):
        super().__init__(message)
        self.levels = levels


class ConvergenceError(AdiabatError):
    """An iterative solver failed to converge"""


class NormDriftError(AdiabatError):
    """Time stepping lost unitarity beyond tolerance"""


class CriterionError(AdiabatError):
    """The adiabatic criterion cannot be evaluated for this system"""


class MetricError(AdiabatError):
    """A metric was evaluated on inputs outside its domain"""


class FitError(AdiabatError):
    """A slope fit had no usable points"""


class ConfigError(AdiabatError):
    """An experiment document or environment setting is invalid"""

    def __init__(self, message: str, fields: tuple = ()):
        super().__init__(message)
        self.fields = fields


class TimeMismatchError(AdiabatError):
    """Dynamic and instantaneous-GS tracks were sampled at different times"""


EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def exit_code_for(error: BaseException) -> int:
    """Process exit status for an exception escaping a command."""
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    return EXIT_FAILED
