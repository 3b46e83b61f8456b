"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class BudgetError(DomainError):
    """The requested computation exceeds a configured size budget."""


class DegenerateWeightsError(DomainError):
    """Sieve weights vanish identically (R or N chosen too small)."""


class ConsistencyError(ArithmeticError):
    """An identity or inequality that must hold by construction failed."""
