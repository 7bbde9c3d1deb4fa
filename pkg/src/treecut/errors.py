"""Exception types shared across the package."""


class ArgumentError(ValueError):
    """A caller violated a documented precondition."""


class OversizeError(ArgumentError):
    """A brute-force routine refused an instance above its size cap."""


class ConsistencyError(ArgumentError):
    """Input data is internally inconsistent (e.g. a non-conservative flow)."""


class InputError(ValueError):
    """Malformed external input (edge lists, weight files, tree files)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InternalError(RuntimeError):
    """An invariant that must hold by construction was violated; a bug."""
