class RampMergeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RampMergeError):
    """An input violated a documented precondition or invariant."""


class NonPositiveGapError(RampMergeError):
    """Car-following was asked to act on a gap <= 0; the caller must treat
    this as a collision already having happened."""


class NoFeasibleCandidateError(RampMergeError):
    """Every sampled lane-change candidate was rejected; no safe gap exists
    right now and the caller should keep following and replan later."""
