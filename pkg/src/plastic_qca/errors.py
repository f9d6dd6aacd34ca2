"""Exception hierarchy shared by every module of the package."""


class QCAError(Exception):
    """Base class for all errors raised by plastic_qca."""


class BoundsError(QCAError, IndexError):
    """A site, link, basis index or label lies outside the lattice."""


class ShapeError(QCAError, ValueError):
    """Operand dimensions do not match."""


class DomainError(QCAError, ValueError):
    """A parameter lies outside the domain where the construction is defined."""


class BudgetError(QCAError, MemoryError):
    """The requested Hilbert space exceeds the configured dimension budget."""


class ConfigError(QCAError, ValueError):
    """An experiment or configuration violates a precondition."""


class NumericalError(QCAError, ArithmeticError):
    """A numerical contract (unitarity, tolerance) was violated."""
