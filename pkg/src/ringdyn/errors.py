"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class OnCircleError(DomainError):
    """The evaluation point lies on the circle itself, where the field is singular."""


class StateError(RuntimeError):
    """The object is not in the state the operation requires."""


class IntegrationError(RuntimeError):
    """Adaptive integration could not continue (step size underflow).

    The partial trajectory accumulated before the failure is attached as
    ``trajectory`` so callers can inspect how far the integration got.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory
