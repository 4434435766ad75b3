"""Exception hierarchy for the simulation engine and experiment harnesses."""


class PlasmodiumError(Exception):
    """Base class for all engine errors."""

    pass


class ContractViolation(PlasmodiumError, ValueError):
    """Raised when an engine operation is called outside its contract."""

    pass


class InputError(PlasmodiumError, ValueError):
    """Raised when user-supplied geometry or data cannot be used."""

    pass


class EstimationError(PlasmodiumError):
    """Raised when a summary position cannot be estimated (empty population)."""

    pass


class UndefinedCorrelationError(PlasmodiumError):
    """Raised when a correlation is requested for constant input."""

    pass


class TargetOutOfArena(PlasmodiumError):
    """Raised when the moving target leaves the usable arena."""

    def __init__(self, position: tuple[float, float], update_index: int):
        super().__init__(
            f"Target left arena at update {update_index}: "
            f"({position[0]:.1f}, {position[1]:.1f})"
        )
        self.position = position
        self.update_index = update_index


class ConfigError(PlasmodiumError):
    """Raised when an experiment config file is missing or invalid."""

    pass
