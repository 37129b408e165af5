class GeometryError(ValueError):
    """Coincident points or otherwise degenerate scene geometry."""


class DimensionError(ValueError):
    """Array shapes that do not fit together."""


class InitializationError(ValueError):
    """Spectral initialization has no informative direction (all-zero data)."""


class DivergenceError(RuntimeError):
    """Non-finite objective during iterative reconstruction."""

    def __init__(self, iteration, message=None):
        self.iteration = iteration
        super().__init__(message or f"objective became non-finite at iteration {iteration}")


class ScenarioError(ValueError):
    """Invalid scenario or plan description.

    ``field`` names the offending entry; ``line`` is set when the error comes
    from a parse failure and a source position is known.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
