"""Exception hierarchy shared across the package."""


class HolodetError(Exception):
    """Base class for package-specific failures."""


class ValidationError(HolodetError):
    """Input data violates a structural invariant; carries the full list."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class MethodRefusal(HolodetError):
    """A method declined to run: size cap, mode mismatch, missing hypothesis."""


class InvariantViolation(HolodetError):
    """An identity that must hold by construction was observed to fail."""
