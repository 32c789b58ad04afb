"""Exceptions shared across modules."""


class DynamicTypeError(RuntimeError):
    """A redex whose shape cannot reduce (for example applying ``true``).

    Unreachable from well-typed programs; kept apart from a stuck operation.
    """


class RouteDisagreement(RuntimeError):
    """The direct and the CPS routes produced different verdicts."""
