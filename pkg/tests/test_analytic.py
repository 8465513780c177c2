import cmath
import math
import random
from fractions import Fraction

import pytest

from artifact.analytic import (
    ArcClassification,
    CoefficientVector,
    _box_integral,
    classify_arc,
    eval_f,
    eval_g,
    fractional_min_search,
    mean_value_constants,
    singular_series_waring,
    waring_count,
)
from artifact.meanvalue import BudgetExceeded, CountingConfig


def naive_sum(coeffs, X):
    total = complex(0.0)
    for x in range(1, X + 1):
        phase = sum(c * x ** (j + 1) for j, c in enumerate(coeffs))
        total += cmath.exp(2j * math.pi * float(phase % 1))
    return total


# ------------------------------------------------------------------- sums

def test_f_zero_coefficients_gives_X():
    for X in (1, 5, 40):
        assert eval_f([Fraction(0), Fraction(0)], X) == X


def test_f_integer_coefficients_gives_X_exactly():
    assert eval_f([Fraction(3), Fraction(-2), Fraction(7)], 25) == 25


def test_f_alternating_example():
    assert abs(eval_f([Fraction(1, 2)], 4)) < 1e-12


def test_g_parity_example():
    assert abs(eval_g(Fraction(1, 2), 2, 4)) < 1e-12


def test_f_matches_naive_oracle():
    rng = random.Random(7)
    for _ in range(25):
        k = rng.randint(1, 4)
        coeffs = [Fraction(rng.randint(-9, 9), rng.randint(1, 9))
                  for _ in range(k)]
        X = rng.randint(1, 40)
        got = eval_f(coeffs, X)
        want = naive_sum(coeffs, X)
        assert abs(got - want) < 1e-9


def test_f_triangle_inequality_random_sweep():
    rng = random.Random(99)
    for _ in range(10_000):
        coeffs = [Fraction(rng.randint(-50, 50), rng.randint(1, 50))
                  for _ in range(rng.randint(1, 3))]
        X = rng.randint(1, 9)
        assert abs(eval_f(coeffs, X)) <= X + 1e-9


def test_f_thread_invariance_bit_exact():
    coeffs = [Fraction(3, 7), Fraction(1, 11), Fraction(5, 13)]
    one = eval_f(coeffs, 1000, CountingConfig(threads=1))
    four = eval_f(coeffs, 1000, CountingConfig(threads=4))
    assert one == four


def test_g_rational_point_oracle():
    for q in (3, 7, 12):
        got = eval_g(Fraction(1, q), 3, 50)
        want = naive_sum([Fraction(0), Fraction(0), Fraction(1, q)], 50)
        assert abs(got - want) < 1e-6


def test_coefficient_vector_validation():
    with pytest.raises(ValueError):
        CoefficientVector(())
    vec = CoefficientVector((Fraction(1, 3), 2))
    assert vec.k == 2
    assert vec.phase(3) == 0                   # 1 + 18 reduced mod 1
    with pytest.raises(ValueError):
        eval_f([Fraction(1)], 0)


# ------------------------------------------------------------------- arcs

def test_arc_examples():
    got = classify_arc(Fraction(1, 2), 3, 100)
    assert got.verdict == "major" and got.witness == (1, 2)
    assert classify_arc(Fraction(377, 610), 3, 100).verdict == "minor"
    got = classify_arc(Fraction(0), 3, 100)
    assert got.verdict == "major" and got.witness == (0, 1)


def test_arc_translation_and_reflection_invariance():
    rng = random.Random(5)
    for _ in range(60):
        alpha = Fraction(rng.randint(0, 400), rng.randint(1, 401))
        alpha %= 1
        base = classify_arc(alpha, 3, 100).verdict
        assert classify_arc(alpha + 1, 3, 100).verdict == base
        assert classify_arc(1 - alpha, 3, 100).verdict == base


def test_arc_minor_when_no_denominator_fits():
    # X below 2k leaves no admissible q at all
    assert classify_arc(Fraction(0), 3, 5).verdict == "minor"


def test_arc_witness_constraints_checked():
    with pytest.raises(AssertionError):
        ArcClassification(Fraction(1, 2), 3, 100, "major", (2, 4))
    with pytest.raises(ValueError):
        ArcClassification(Fraction(1, 2), 3, 100, "major", None)
    with pytest.raises(ValueError):
        ArcClassification(Fraction(1, 2), 3, 100, "bogus")


def test_arc_verdict_against_direct_scan():
    # every (a, q) with q <= X/(2k), not just (semi)convergents
    k, X = 2, 60
    cap = X // (2 * k)
    cutoff = Fraction(1, 2 * k * X ** (k - 1))
    rng = random.Random(11)
    for _ in range(40):
        alpha = Fraction(rng.randint(0, 120), rng.randint(1, 121)) % 1
        direct = any(
            abs(q * alpha - round(q * alpha)) <= cutoff
            for q in range(1, cap + 1))
        assert (classify_arc(alpha, k, X).verdict == "major") == direct


# ---------------------------------------------------------------- minimum

def test_fractional_min_trivial_cases():
    got = fractional_min_search([Fraction(0), Fraction(0)], 10)
    assert (got.n, got.value) == (1, 0)
    got = fractional_min_search([Fraction(1, 2)], 4)
    assert (got.n, got.value) == (2, 0)


def test_fractional_min_matches_direct_scan():
    rng = random.Random(21)
    for _ in range(20):
        coeffs = [Fraction(rng.randint(-20, 20), rng.randint(1, 20))
                  for _ in range(rng.randint(1, 4))]
        N = rng.randint(1, 200)
        got = fractional_min_search(coeffs, N)
        vec = CoefficientVector(tuple(coeffs))
        values = [min(vec.phase(n), 1 - vec.phase(n))
                  for n in range(1, N + 1)]
        assert got.value == min(values)
        assert values[got.n - 1] == got.value


def test_fractional_min_reference_flag():
    got = fractional_min_search(
        [Fraction(0)] * 3 + [Fraction(1, 97)], 97)
    assert got.value == 0
    assert got.below_reference is True
    assert fractional_min_search([Fraction(1, 3)], 5).below_reference is None


def test_fractional_min_budget():
    with pytest.raises(BudgetExceeded):
        fractional_min_search([Fraction(1, 3)], 10 ** 7,
                              CountingConfig(budget=100))


# ------------------------------------------------------------------ counts

def test_waring_examples():
    assert waring_count(2, 2, 25) == 2
    assert waring_count(2, 3, 1729) == 4
    for n in (1, 8, 27, 100):
        root = round(n ** (1 / 3))
        assert waring_count(1, 3, n) == (1 if root ** 3 == n else 0)


def test_waring_cumulative_cross_check():
    import itertools
    for s, k, n in ((2, 3, 300), (3, 2, 120)):
        cumulative = sum(waring_count(s, k, m) for m in range(1, n + 1))
        cap = int(n ** (1 / k)) + 2
        direct = sum(
            1 for xs in itertools.product(range(1, cap), repeat=s)
            if sum(x ** k for x in xs) <= n)
        assert cumulative == direct


def test_waring_budget_and_validation():
    with pytest.raises(BudgetExceeded):
        waring_count(5, 2, 10 ** 6, CountingConfig(budget=1000))
    with pytest.raises(ValueError):
        waring_count(0, 2, 10)


# ------------------------------------------------------------------ series

def test_series_q1_is_one():
    assert singular_series_waring(3, 3, 7, 1).value == 1.0


def test_series_linear_case_telescopes_exactly():
    got = singular_series_waring(2, 1, 10, 50)
    assert got.value == 1.0
    assert got.movement == 0.0


def test_series_positive_and_stabilizing():
    values = [singular_series_waring(5, 2, 2001, Q).value
              for Q in (10, 20, 40, 80)]
    assert all(v > 0 for v in values)
    assert abs(values[-1] - values[-2]) < abs(values[1] - values[0]) + 0.01
    assert abs(values[-1] - values[-2]) < 0.05


def test_series_doubling_within_reported_movement():
    for s, k, n, Q in ((5, 2, 2001, 40), (5, 2, 2500, 30), (3, 2, 101, 25),
                       (4, 2, 50, 30), (5, 2, 1729, 35)):
        report = singular_series_waring(s, k, n, Q)
        doubled = singular_series_waring(s, k, n, 2 * Q)
        assert abs(doubled.value - report.value) <= report.movement + 1e-12


def test_series_budget():
    with pytest.raises(BudgetExceeded):
        singular_series_waring(5, 2, 10, 10 ** 4, CountingConfig(budget=100))


# --------------------------------------------------------------- constants

def test_constants_integrand_at_origin():
    # with a tiny box the integrand is essentially |inner integral|^2 = 1
    value = _box_integral(1, 2, 1e-9, 1, 64)
    assert abs(value / (2e-9) ** 2 - 1.0) < 1e-6


def test_constants_one_dimensional_oracle():
    report = mean_value_constants(1, 1, 6, 16, 256)
    assert abs(report.integral - 1.0) < 0.02
    assert report.refinement < 1e-3
    assert abs(report.series - 1.0) < 1e-9


def test_constants_monotone_in_box():
    small = mean_value_constants(1, 2, 2, 2, 12)
    large = mean_value_constants(1, 2, 2, 4, 12)
    assert large.integral >= small.integral - 1e-12


def test_constants_budget():
    with pytest.raises(BudgetExceeded):
        mean_value_constants(2, 3, 50, 4, 64, CountingConfig(budget=10 ** 5))


def test_asymptotic_formula_smoke_window():
    # windowed comparison with the predicted main term; approximate by
    # design, the tolerance is deliberately loose
    s, k = 5, 2
    gamma_factor = math.gamma(1 + 1 / k) ** s / math.gamma(s / k)
    ratios = []
    for n in range(2000, 4001, 100):
        count = waring_count(s, k, n)
        series = singular_series_waring(s, k, n, 40).value
        ratios.append(count / (gamma_factor * series * n ** (s / k - 1)))
    average = sum(ratios) / len(ratios)
    assert abs(average - 1.0) < 0.3
