"""Exception types shared across the toolkit."""


class ConfigurationError(ValueError):
    """An experiment configuration violates a stated hypothesis."""


class WindowError(RuntimeError):
    """A computation left its validity window (mass reached the periodic boundary)."""

    def __init__(self, message: str, largest_valid_t: float | None = None):
        super().__init__(message)
        self.largest_valid_t = largest_valid_t


class DivergenceError(RuntimeError):
    """Time stepping produced non-finite values."""

    def __init__(self, message: str, last_valid_time: float | None = None):
        super().__init__(message)
        self.last_valid_time = last_valid_time
