"""Exception types raised by the analytic routines."""


class QubitUncertaintyError(ValueError):
    """Base class for all errors raised by this package."""


class DegenerateObservable(QubitUncertaintyError):
    """An observable with ``|a| = 0`` (a multiple of the identity) was supplied
    where a non-degenerate spectrum is required."""


class LinearlyDependentFamily(QubitUncertaintyError):
    """The observable vectors do not have the rank the operation requires."""


class OutOfBox(QubitUncertaintyError):
    """A region point has a coordinate outside ``[0, |a_k|]``."""


class AngleConstraintViolated(QubitUncertaintyError):
    """The pairwise angles of a triple cannot come from independent vectors."""


class DomainError(QubitUncertaintyError):
    """An argument lies outside the domain of a closed-form expression."""


class DimensionMismatch(QubitUncertaintyError):
    """Composite observable and multipartite state disagree on the site count."""
