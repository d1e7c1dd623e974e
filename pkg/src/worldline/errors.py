"""Exception types raised by the engine."""


class WorldlineError(Exception):
    """Base class for all engine errors."""


class ParseError(WorldlineError, ValueError):
    def __init__(self, message: str, text: str = "", position: int = -1):
        self.text = text
        self.position = position
        if position >= 0:
            message = f"{message} at position {position}: {text!r}"
        super().__init__(message)


class ConfigError(WorldlineError, ValueError):
    pass


class CoefficientOverflow(WorldlineError, OverflowError):
    pass


class EliminationError(WorldlineError):
    pass


class DegenerateSystem(EliminationError):
    pass


class ConvergenceError(WorldlineError):
    def __init__(self, message: str, best=None, residual: float = float("nan")):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.best = best
        self.residual = residual


class ConjugateClosureError(WorldlineError):
    pass


class AssemblyFailure(WorldlineError):
    def __init__(self, message: str, pair=None, residual: float = float("nan")):
        super().__init__(message)
        self.pair = pair
        self.residual = residual


class NearEvent(WorldlineError):
    pass


class PipelineFailure(WorldlineError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
