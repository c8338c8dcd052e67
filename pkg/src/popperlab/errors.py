"""Error hierarchy for the laboratory.

Two families matter to callers: parameter/precondition problems (the request
itself is unusable) and numerical-contract violations (the request was fine
but the discretized computation cannot be trusted).  The CLI maps the first
family to exit code 2 and the second to exit code 3.
"""


class PopperLabError(Exception):
    """Base class for all package-specific errors."""


class UserParameterError(PopperLabError):
    """A configuration or precondition problem; the inputs must change."""


class NumericalContractError(PopperLabError):
    """A numerical guarantee (norm, tail containment, memory) was violated."""


class GridMismatchError(UserParameterError):
    """Two objects that must share a grid were built on different grids."""


class UnderResolvedError(UserParameterError):
    """Grid spacing is too coarse for the requested feature width."""


class CapExceededError(UserParameterError):
    """The scale ratio demands more grid points than the configured cap."""


class ZeroNormError(NumericalContractError):
    """State norm below 1e-30; normalization would amplify noise."""


class TailLeakError(NumericalContractError):
    """Boundary amplitude is not negligible; spectral results untrustworthy."""


class MemoryBoundError(NumericalContractError):
    """A dense intermediate (density matrix) would exceed the allowed size."""


class ScenarioFailure(PopperLabError):
    """A pipeline stage failed; carries the stage name and the original error."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
