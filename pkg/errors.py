"""Exceptions raised by the chirpmai numerical modules."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class FormulaInconsistencyError(DomainError):
    """
    A literal closed-form BER expression produced a value outside [0, 1].

    Attributes:
        xi: Index of the symbol pattern whose term left the range
            (None when only the total is out of range)
        value: The offending value
    """

    def __init__(self, message: str, xi: int | None = None, value: float | None = None):
        super().__init__(message)
        self.xi = xi
        self.value = value
