"""Exception types shared across modules (the CLI maps them to exit codes)."""


class BudgetExceeded(RuntimeError):
    """A computation would exceed its configured work budget."""


class DegeneratePointError(ValueError):
    """Var f(x) = 0 at the requested point; the zero density is undefined there."""


class CrossCheckError(AssertionError):
    """Two independent routes to the same quantity disagree."""
