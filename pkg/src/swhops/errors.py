"""Error types shared across the package.

ValidationError: bad configuration or arguments (CLI exit code 2).
InvariantViolation: an internal correctness guarantee was broken (exit code 3).
"""


class ValidationError(ValueError):
    pass


class InvariantViolation(RuntimeError):
    pass
