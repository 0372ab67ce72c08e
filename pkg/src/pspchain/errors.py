"""Exception types shared across the package."""


class CapExceededError(ValueError):
    """Raised when an enumeration would exceed the configured volume cap."""

    def __init__(self, n: int, cap: int):
        self.n = n
        self.cap = cap
        super().__init__(f"volume half-width n={n} exceeds enumeration cap {cap}")


class CouplingRangeError(LookupError):
    """Raised when a table coupling family is queried outside its entries."""


class SymmetryConditionError(ValueError):
    """Raised when a closed form needs I_k == I_{1-k} and the family breaks it."""
