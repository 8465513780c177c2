"""Exact arithmetic: unbounded integers, reduced rationals, integer polynomials.

No floats enter or leave this module.  Rationals are fractions.Fraction and
therefore always in lowest terms; integers are plain Python ints.
"""

from __future__ import annotations

from fractions import Fraction

ExactInt = int
ExactRational = Fraction


class SingularMatrix(ValueError):
    """Raised when a linear system has no unique solution."""


class IntPolynomial:
    """Integer polynomial with coefficients stored ascending by degree.

    Trailing zero coefficients are stripped, so equal polynomials compare
    equal and hash alike.  The zero polynomial has an empty coefficient
    tuple and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        c = [int(a) for a in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def monomial(cls, degree, coeff=1):
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        return cls([0] * degree + [coeff])

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, IntPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] += v
        return IntPolynomial(out)

    def __neg__(self):
        return IntPolynomial([-v for v in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPolynomial([other * v for v in self.coeffs])
        if not (self and other):
            return IntPolynomial()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPolynomial(out)

    __rmul__ = __mul__

    def evaluate(self, x):
        acc = 0
        for coeff in reversed(self.coeffs):
            acc = acc * x + coeff
        return acc

    def __repr__(self):
        return f"IntPolynomial({list(self.coeffs)})"


def poly_expand_shift(poly, shift):
    """Expand poly(x + shift) into a plain IntPolynomial in x.

    Horner's scheme over the polynomial ring: the accumulator is multiplied
    by (x + shift) once per input coefficient, so the cost is quadratic in
    the degree and every intermediate stays an exact integer.
    """
    shift = int(shift)
    acc = IntPolynomial()
    for coeff in reversed(poly.coeffs):
        if acc:
            shifted = [shift * v for v in acc.coeffs] + [0]
            for i, v in enumerate(acc.coeffs):
                shifted[i + 1] += v
            acc = IntPolynomial(shifted)
        acc = acc + IntPolynomial([coeff])
    return acc


def solve_rational_linear(matrix, rhs):
    """Solve an n-by-n linear system exactly over the rationals.

    Accepts ints or Fractions, returns a list of Fractions.  Raises
    SingularMatrix when elimination cannot find a nonzero pivot, which is
    exact here rather than a conditioning judgement.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix) or len(rhs) != n:
        raise ValueError("matrix must be square and match the rhs length")
    a = [[Fraction(v) for v in row] for row in matrix]
    b = [Fraction(v) for v in rhs]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrix(f"no pivot in column {col}")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            b[col], b[pivot] = b[pivot], b[col]
        inv = a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] / inv
            if factor == 0:
                continue
            for c in range(col, n):
                a[r][c] -= factor * a[col][c]
            b[r] -= factor * b[col]
    out = [Fraction(0)] * n
    for row in range(n - 1, -1, -1):
        acc = b[row]
        for c in range(row + 1, n):
            acc -= a[row][c] * out[c]
        out[row] = acc / a[row][row]
    return out


def mod_pow(base, exponent, modulus):
    """base**exponent mod modulus with the result normalised into [0, modulus)."""
    if exponent < 0:
        raise ValueError("exponent must be nonnegative")
    if modulus < 1:
        raise ValueError("modulus must be positive")
    return pow(int(base), int(exponent), int(modulus))
