"""Exception taxonomy shared across the package.

Validation problems (bad arguments, malformed configs) derive from
``ValueError`` and map to CLI exit code 2; failures that can only occur at
run time (sampler stalls, I/O) derive from ``RuntimeError`` and map to exit
code 3.
"""


class InvalidInput(ValueError):
    """Arguments violate a documented precondition (dimension mismatch, ...)."""


class UnsupportedDimension(ValueError):
    """Operation only defined in the plane was called with d != 2."""


class DegenerateConfiguration(ValueError):
    """Current point is not extremal: blocked directions span a half-plane or more."""


class InsufficientSamples(ValueError):
    """An estimator was asked to work from too little data."""


class InsufficientRenewals(InsufficientSamples):
    """Renewal-based cross-check requires more regeneration events."""


class SamplerStall(RuntimeError):
    """Rejection sampler exceeded its proposal cap; signals a corrupted state.

    Carries ``partial`` (whatever trace was built before the stall) when the
    failure happened inside a full run.
    """

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class SplitSamplerError(RuntimeError):
    """Residual-density rejection stalled; alpha too large for the state."""

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial
