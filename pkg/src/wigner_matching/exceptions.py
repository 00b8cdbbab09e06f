class WignerMatchingException(Exception):
    def __init__(self, msg):
        super().__init__(msg)
        self.msg = msg


class GridException(WignerMatchingException):
    def __init__(self, reason):
        super().__init__(f'Invalid grid: {reason}.')


class DegreeOverflowException(WignerMatchingException):
    def __init__(self, degree, limit):
        super().__init__(f'Polynomial degree {degree} exceeds the supported maximum {limit}.')


class TruncationException(WignerMatchingException):
    def __init__(self):
        super().__init__('Both factors are sampled; an explicit, agreed truncation order is required.')


class PieceMismatchException(WignerMatchingException):
    def __init__(self, symbol_piece, hamiltonian_piece):
        super().__init__(f'Symbol defined on {symbol_piece} cannot be paired with Hamiltonian piece {hamiltonian_piece}.')


class NonConvergentException(WignerMatchingException):
    def __init__(self, what, spread, tolerance):
        super().__init__(f'{what} did not converge: spread {spread:.3e} exceeds tolerance {tolerance:.3e}.')


class NoBoundStateException(WignerMatchingException):
    def __init__(self):
        super().__init__('No bound state: the point interaction has no positive root kappa.')


class ResonanceException(WignerMatchingException):
    def __init__(self, k):
        super().__init__(f'Degenerate scattering data at k={k}: D vanishes.')


class EnergyRangeException(WignerMatchingException):
    def __init__(self, msg):
        super().__init__(msg)


class NonFiniteException(WignerMatchingException):
    def __init__(self, what):
        super().__init__(f'Non-finite value encountered in {what}.')


class ConfigException(WignerMatchingException):
    def __init__(self, msg):
        super().__init__(msg)
