"""Exception types shared across the package."""


class ChainFormatError(ValueError):
    """A chain-spec file could not be parsed or has the wrong shape."""


class ChainValidationError(ValueError):
    """A MetricChain invariant (metric axioms, stochasticity) is violated."""


class TransportError(ValueError):
    """Bad transport input (unnormalized measure) or a failed certificate."""


class EmptyAnnulusError(ValueError):
    """No point falls in the annulus eps <= d(x, x0) <= 2*eps."""


class DegenerateKernelError(ValueError):
    """The sub-Gaussian constant would be zero (point-mass kernel rows)."""


class NoAttractivePointError(ValueError):
    """rho <= 0: the origin is not attractive at this eps."""


class InadmissibleParamsError(ValueError):
    """Bound requested with parameters that fail the admissibility conditions."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InfeasibleSearchError(ValueError):
    """Parameter search found no admissible (alpha, d0) pair."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class PowerIterationError(RuntimeError):
    """Power iteration did not reach the requested tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
