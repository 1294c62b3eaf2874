"""Exception types raised across the package."""


class DomainError(ValueError):
    """A parameter lies outside the geometric domain of a formula.

    ``parameter`` names the offending input so front ends can report it.
    """

    def __init__(self, parameter, message):
        super().__init__(f"{parameter}: {message}")
        self.parameter = parameter


class PoleProjectionError(DomainError):
    """The North Pole has no stereographic image."""

    def __init__(self, message="point coincides with the North Pole"):
        super().__init__("point", message)


class ConstructionError(RuntimeError):
    """A deterministic construction failed its own postcondition."""
