"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-contract input supplied by the caller."""


class InvariantError(RuntimeError):
    """An internal guarantee did not hold. Always indicates a bug."""
