class ConfigError(ValueError):
    """Invalid configuration value (unknown level, task, arm, bad field)."""


class UsageError(RuntimeError):
    """API used out of order or with mismatched shapes."""


class SimulationError(RuntimeError):
    """Physics produced a non-finite state."""


class DataError(ValueError):
    """Stored transition or episode data violates its contract."""


class TrainingError(RuntimeError):
    """Non-finite loss or objective during optimization."""
