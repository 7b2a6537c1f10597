"""Exception types raised across the package."""


class GraphParseError(ValueError):
    """Malformed graph file; carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GraphValidationError(ValueError):
    """A graph would contain a loop, a parallel edge or a bad endpoint."""


class InvalidEdgeError(ValueError):
    pass


class InvalidWeightError(ValueError):
    pass


class SizeCapError(ValueError):
    """Exhaustive search requested on a graph above the configured cap."""


class EmptyNeighborhoodError(ValueError):
    pass


class DisconnectedGraphError(ValueError):
    pass


class NumericError(ValueError):
    pass


class NotPSDError(ValueError):
    def __init__(self, lambda_min, tol):
        self.lambda_min = lambda_min
        self.tol = tol
        super().__init__(f"matrix is not PSD: lambda_min={lambda_min:.3e} < -{tol:.1e}")


class NotCongruentError(ValueError):
    pass


class SolverError(RuntimeError):
    """The SDP engine did not return an optimal solution."""

    def __init__(self, message, solution=None):
        self.solution = solution
        super().__init__(message)


class RepresentationError(ValueError):
    pass


class UnsupportedOrderError(ValueError):
    pass
