"""Exception types shared across the package."""


class NumericsError(ValueError):
    """A computation was rejected on numerical grounds.

    Raised for non-PSD information matrices, singular rank-one updates,
    divergent Fisher information, unidentified parameters, and similar
    conditions where the inputs parse fine but the mathematics refuses.
    """
