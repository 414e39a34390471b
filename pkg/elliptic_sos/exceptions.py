class EllipticSOSError(Exception):
    """Base class for every error raised by elliptic_sos."""


class InvalidContext(EllipticSOSError):
    pass


class NonConvergence(EllipticSOSError):
    def __init__(self, what, terms):
        self.what = what
        self.terms = terms
        super().__init__(f"{what} did not converge within {terms} terms")


class DegenerateParameter(EllipticSOSError):
    """
    A bracket that has to be divided by (or that has to stay away from the zero lattice)
    fell below the genericity guard.

    `guard` is a human readable name of the failing bracket, e.g. "[theta+zeta+lambda_2]".
    """

    def __init__(self, guard, value=None):
        self.guard = guard
        self.value = value
        if value is None:
            message = f"Degenerate parameter: {guard} is not generic"
        else:
            message = f"Degenerate parameter: {guard} = {abs(value):.3e} is below the genericity guard"
        super().__init__(message)


class DegenerateNodes(DegenerateParameter):
    pass


class ContourTooLarge(EllipticSOSError):
    pass


class RouteDisagreement(EllipticSOSError):
    def __init__(self, deviations, tolerance):
        self.deviations = deviations
        self.tolerance = tolerance
        worst = max(deviations.values()) if deviations else 0.0
        super().__init__(f"Routes disagree: worst relative deviation {worst:.3e} exceeds {tolerance:.1e}")
