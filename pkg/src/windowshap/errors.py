"""Exception hierarchy shared across the package."""

from __future__ import annotations


class WindowShapError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(WindowShapError):
    """Invalid parameters or inconsistent run configuration."""


class ShapeMismatch(WindowShapError):
    """Array dimensions disagree with the declared (D, L) shape."""


class NonFiniteValue(WindowShapError):
    """A value is NaN or infinite where finite reals are required."""


class DuplicateVariableName(WindowShapError):
    """Variable names must be unique within an instance."""


class OverlappingWindows(WindowShapError):
    """Two windows of the same variable share a time step."""

    def __init__(self, variable: int, step: int):
        self.variable = variable
        self.step = step
        super().__init__(f"windows of variable {variable} overlap at time step {step}")


class IncompleteCoverage(WindowShapError):
    """A partition-flagged window set leaves time steps uncovered."""

    def __init__(self, variable: int, missing_steps: tuple[int, ...]):
        self.variable = variable
        self.missing_steps = tuple(missing_steps)
        super().__init__(
            f"variable {variable} is missing coverage for steps {sorted(self.missing_steps)}"
        )


class InvalidWindowLength(ConfigError):
    """Window length outside [1, L]."""


class InvalidStride(ConfigError):
    """Stride must be a positive integer."""


class UnsplittableWindow(WindowShapError):
    """A length-1 window cannot be split further."""


class TooManyPlayers(WindowShapError):
    """Exact enumeration was requested above the configured player limit."""

    def __init__(self, players: int, limit: int):
        self.players = players
        self.limit = limit
        super().__init__(f"{players} players exceed the exact-enumeration limit of {limit}")


class DegenerateCoalition(WindowShapError):
    """Kernel weight requested for the empty or full coalition."""


class SingularSystem(WindowShapError):
    """The coalition regression system could not be solved; raise n_samples."""


class PredictorFailure(WindowShapError):
    """A predictor call failed; carries the batch context."""

    def __init__(self, message: str, batch_size: int | None = None):
        self.batch_size = batch_size
        if batch_size is not None:
            message = f"{message} (batch of {batch_size} instances)"
        super().__init__(message)


class ConnectionFailure(PredictorFailure):
    """An external predictor endpoint or process is unreachable or broken."""


class Timeout(ConnectionFailure):
    """An external predictor did not answer within the configured timeout."""


class ProtocolViolation(PredictorFailure):
    """An external predictor answered outside the wire-protocol contract."""
