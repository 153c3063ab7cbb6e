"""Semantic exception hierarchy for the pricing engine."""


class PerpRegimeError(Exception):
    """Base error for this package."""


class DomainError(PerpRegimeError, ValueError):
    """Inputs violate the contract: non-finite values or out-of-domain parameters."""


class BracketError(PerpRegimeError):
    """A root bracket that theory guarantees could not be established.

    This indicates an internal-consistency failure, not a user error.
    """


class UnsupportedBranchError(PerpRegimeError):
    """A formula family was requested outside its validity region.

    Raised e.g. when the auxiliary-function coefficients are non-finite
    (post-change exponent at its resonance value) and the caller should
    have routed to the matching special case.
    """
