import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.exactmath import (
    IntPolynomial,
    SingularMatrix,
    mod_pow,
    poly_expand_shift,
    solve_rational_linear,
)


def test_zero_polynomial_normalization():
    assert IntPolynomial([0, 0, 0]) == IntPolynomial()
    assert IntPolynomial().degree == -1
    assert not IntPolynomial([0])
    assert IntPolynomial([1, 2, 0]).coeffs == (1, 2)


def test_monomial():
    assert IntPolynomial.monomial(3).coeffs == (0, 0, 0, 1)
    assert IntPolynomial.monomial(0, 7).coeffs == (7,)
    with pytest.raises(ValueError):
        IntPolynomial.monomial(-1)


def test_ring_operations():
    p = IntPolynomial([1, 2])        # 1 + 2x
    q = IntPolynomial([0, 0, 3])     # 3x^2
    assert (p + q).coeffs == (1, 2, 3)
    assert (p - p) == IntPolynomial()
    assert (p * q).coeffs == (0, 0, 3, 6)
    assert (2 * p).coeffs == (2, 4)
    assert p.evaluate(5) == 11
    assert hash(IntPolynomial([1, 2])) == hash(p)


def test_expand_square_shift_one():
    assert poly_expand_shift(IntPolynomial.monomial(2), 1) == IntPolynomial([1, 2, 1])


def test_expand_cube_shift_one():
    assert poly_expand_shift(IntPolynomial.monomial(3), 1) == IntPolynomial([1, 3, 3, 1])


coeff_lists = st.lists(st.integers(-50, 50), max_size=8)


@given(coeff_lists, st.integers(-20, 20))
def test_expand_shift_round_trip(coeffs, shift):
    p = IntPolynomial(coeffs)
    assert poly_expand_shift(poly_expand_shift(p, shift), -shift) == p


@given(coeff_lists, st.integers(-20, 20), st.integers(-30, 30))
def test_expand_shift_matches_evaluation(coeffs, shift, x):
    p = IntPolynomial(coeffs)
    assert poly_expand_shift(p, shift).evaluate(x) == p.evaluate(x + shift)


def test_solve_known_system():
    assert solve_rational_linear([[2, 1], [1, 3]], [5, 10]) == [1, 3]


def test_solve_accepts_fractions():
    sol = solve_rational_linear([[Fraction(1, 2), 0], [0, 1]], [1, Fraction(1, 3)])
    assert sol == [2, Fraction(1, 3)]


def test_solve_substitution_random():
    # the returned vector must satisfy the system exactly, no float residue
    rng = random.Random(7)
    solved = 0
    while solved < 200:
        n = rng.randint(1, 4)
        a = [[Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n)]
             for _ in range(n)]
        rhs = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n)]
        try:
            sol = solve_rational_linear(a, rhs)
        except SingularMatrix:
            continue
        for row, b in zip(a, rhs):
            assert sum(c * x for c, x in zip(row, sol)) == b
        solved += 1


def test_singular_matrix_raises():
    with pytest.raises(SingularMatrix):
        solve_rational_linear([[1, 2], [2, 4]], [1, 2])
    with pytest.raises(SingularMatrix):
        solve_rational_linear([[0]], [1])


def test_solve_shape_validation():
    with pytest.raises(ValueError):
        solve_rational_linear([[1, 2]], [1])
    with pytest.raises(ValueError):
        solve_rational_linear([[1]], [1, 2])


def test_mod_pow_matches_naive_loop():
    rng = random.Random(123)
    for _ in range(1000):
        base = rng.randint(-10 ** 6, 10 ** 6)
        exp = rng.randint(0, 40)
        mod = rng.randint(1, 10 ** 6)
        acc = 1 % mod
        for _ in range(exp):
            acc = acc * base % mod
        assert mod_pow(base, exp, mod) == acc


def test_mod_pow_range_and_validation():
    assert mod_pow(-3, 3, 5) == 3
    assert 0 <= mod_pow(-3, 3, 5) < 5
    assert mod_pow(10, 0, 1) == 0
    with pytest.raises(ValueError):
        mod_pow(2, -1, 5)
    with pytest.raises(ValueError):
        mod_pow(2, 3, 0)
