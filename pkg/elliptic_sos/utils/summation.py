from typing import Iterable


class KahanSum:
    """
    Running compensated sum of complex terms (Neumaier's variant of Kahan summation).

    Real and imaginary parts are compensated together since complex addition is componentwise.
    """

    def __init__(self, value: complex = 0j):
        self._sum = complex(value)
        self._compensation = 0j

    @staticmethod
    def _two_sum(total: float, term: float):
        result = total + term
        if abs(total) >= abs(term):
            error = (total - result) + term
        else:
            error = (term - result) + total
        return result, error

    def add(self, term: complex) -> 'KahanSum':
        term = complex(term)
        real, real_error = self._two_sum(self._sum.real, term.real)
        imag, imag_error = self._two_sum(self._sum.imag, term.imag)
        self._sum = complex(real, imag)
        self._compensation += complex(real_error, imag_error)
        return self

    def extend(self, terms: Iterable[complex]) -> 'KahanSum':
        for term in terms:
            self.add(term)
        return self

    @property
    def value(self) -> complex:
        return self._sum + self._compensation

    def __complex__(self):
        return self.value


def compensated_sum(terms: Iterable[complex]) -> complex:
    return KahanSum().extend(terms).value
