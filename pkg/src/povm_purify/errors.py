"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: validation failures exit with 2,
resource/numerics failures with 3.
"""


class ValidationError(ValueError):
    """A parameter or input violates a documented invariant."""


class DegenerateModelError(ValidationError):
    """The model carries no information (e.g. fully isotropic noise)."""


class ResourceLimitError(RuntimeError):
    """A requested computation exceeds a declared resource bound."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not converge within its iteration budget."""


class NumericsError(RuntimeError):
    """An internal cross-check between two computation routes failed."""


class TailMassError(NumericsError):
    """A truncated distribution leaves too much probability beyond its cutoff."""


class GridCoverageError(NumericsError):
    """A sampling grid does not cover enough probability mass."""
