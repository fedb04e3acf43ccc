"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Operand shapes do not match the declared local dimension."""


class NonHermitianError(ValueError):
    """A matrix expected to be Hermitian is not, within tolerance."""


class ConvergenceError(ArithmeticError):
    """The Jacobi eigen-solver hit its sweep cap."""


class NotCirculantError(ValueError):
    """A dense matrix has weight outside the circulant support.

    ``index`` is the (row, col) of the largest offending entry.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NotBellDiagonalError(ValueError):
    """A circulant state is not a mixture of magic-basis projectors.

    ``block`` is the shift index n of the worst offending block.
    """

    def __init__(self, message, block=None):
        super().__init__(message)
        self.block = block
