class ContractViolation(ValueError):
    """An input broke a documented precondition (normalization, involution, ...)."""


class EmptyDataError(ValueError):
    """A count record had zero total events."""


class CircuitError(ValueError):
    """An optical circuit is malformed or routes light outside its declared modes."""


class SettingTableError(ValueError):
    """A waveplate setting table could not be parsed or is missing required plates."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
