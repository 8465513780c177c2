"""Floating-point evaluation of the exponential sums and their factors.

Coefficients enter as exact rationals only.  Every phase a_1 x + ... +
a_k x^k is computed in exact arithmetic and reduced mod 1 before the one
transcendental call, so the evaluated phase always lies in [0, 1) and
large x costs no precision.  The same discipline drives the rational-arc
classifier (continued fractions of the exact coefficient), the ||.||
minimum search, and the exact-zero recognition inside the truncated
singular series.

Representation counts are exact integers via dynamic programming; the
truncated singular series and singular integral are best-effort floats
with self-reported convergence diagnostics, never certified values.
"""

import cmath
import itertools
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .meanvalue import BudgetExceeded, CountingConfig

TWO_PI = 2.0 * math.pi


def _unit(phase):
    """e(phase) for an exact phase already reduced into [0, 1)."""
    return cmath.exp(complex(0.0, TWO_PI * float(phase)))


@dataclass(frozen=True)
class CoefficientVector:
    """Exact phase-polynomial coefficients (alpha_1, ..., alpha_k)."""

    coeffs: tuple

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("at least one coefficient is required")
        object.__setattr__(self, "coeffs",
                           tuple(Fraction(c) for c in self.coeffs))

    @property
    def k(self):
        return len(self.coeffs)

    def phase(self, x):
        """alpha_1 x + ... + alpha_k x^k reduced into [0, 1), exactly."""
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = (acc + c) * x
        return acc % 1


SUM_BLOCK = 1024


def eval_f(coeffs, X, config=None):
    """Sum of e(alpha_1 x + ... + alpha_k x^k) over 1 <= x <= X."""
    config = config or CountingConfig()
    if not isinstance(coeffs, CoefficientVector):
        coeffs = CoefficientVector(tuple(coeffs))
    if X < 1:
        raise ValueError("X must be at least 1")

    def partial(start):
        return sum((_unit(coeffs.phase(x))
                    for x in range(start, min(start + SUM_BLOCK, X + 1))),
                   complex(0.0))

    # chunk boundaries are fixed by SUM_BLOCK, never by the thread count,
    # and partials reduce in index order, so the float result is identical
    # for every scheduling
    starts = range(1, X + 1, SUM_BLOCK)
    if config.threads == 1 or len(starts) == 1:
        return sum(map(partial, starts), complex(0.0))
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        return sum(pool.map(partial, starts), complex(0.0))


def eval_g(alpha_k, k, X, config=None):
    """Single-monomial sum of e(alpha x^k) over 1 <= x <= X."""
    if k < 1:
        raise ValueError("k must be at least 1")
    coeffs = (Fraction(0),) * (k - 1) + (Fraction(alpha_k),)
    return eval_f(CoefficientVector(coeffs), X, config)


@dataclass(frozen=True)
class ArcClassification:
    """Verdict for one rational point, with the approximation witness."""

    alpha: Fraction
    k: int
    X: int
    verdict: str
    witness: tuple = None

    def __post_init__(self):
        if self.verdict not in ("minor", "major"):
            raise ValueError("verdict must be minor or major")
        if (self.verdict == "major") != (self.witness is not None):
            raise ValueError("major verdicts carry a witness, minor ones none")
        if self.witness is not None:
            a, q = self.witness
            assert q >= 1 and gcd(a, q) == 1
            assert 2 * self.k * q <= self.X
            assert (2 * self.k * abs(q * self.alpha - a)
                    * self.X ** (self.k - 1) <= 1)


def _approximations(alpha):
    """Convergents and semiconvergents of alpha, increasing denominator."""
    num, den = alpha.numerator, alpha.denominator
    p_prev, q_prev, p, q = 1, 0, num // den, 1
    yield p, q
    num, den = den, num - (num // den) * den
    while den:
        digit, rem = divmod(num, den)
        for t in range(1, digit + 1):
            yield p_prev + t * p, q_prev + t * q
        p_prev, q_prev, p, q = p, q, p_prev + digit * p, q_prev + digit * q
        num, den = den, rem


def classify_arc(alpha, k, X):
    """Major iff some coprime a/q approximates alpha to the arc cutoffs.

    The verdict depends on alpha mod 1 only.  Every best approximation
    with bounded denominator is a convergent or semiconvergent, so the
    scan over those (denominator at most X/(2k)) is exhaustive.
    """
    if k < 1 or X < 1:
        raise ValueError("k and X must be at least 1")
    alpha = Fraction(alpha) % 1
    q_cap = Fraction(X, 2 * k)
    cutoff = Fraction(1, 2 * k * X ** (k - 1))
    for a, q in _approximations(alpha):
        if q > q_cap:
            break
        if abs(q * alpha - a) <= cutoff:
            return ArcClassification(alpha, k, X, "major", (a, q))
    return ArcClassification(alpha, k, X, "minor")


@dataclass(frozen=True)
class FractionalMinimum:
    """Minimizer of ||phase(n)|| over 1 <= n <= N.

    below_reference compares the minimum against N to the power -tau(k),
    the equidistribution exponent; None when k < 4 leaves tau undefined.
    """

    n: int
    value: Fraction
    below_reference: object


def fractional_min_search(coeffs, N, config=None):
    config = config or CountingConfig()
    if not isinstance(coeffs, CoefficientVector):
        coeffs = CoefficientVector(tuple(coeffs))
    if N < 1:
        raise ValueError("N must be at least 1")
    if N * coeffs.k > config.budget:
        raise BudgetExceeded(N * coeffs.k, config.budget)
    best_n, best = 1, Fraction(1)
    for n in range(1, N + 1):
        phase = coeffs.phase(n)
        dist = min(phase, 1 - phase)
        if dist < best:
            best_n, best = n, dist
            if best == 0:
                break
    k = coeffs.k
    below = None
    if k >= 4:
        below = N * best ** (4 * k * (k - 2)) < 1
    return FractionalMinimum(n=best_n, value=best, below_reference=below)


def waring_count(s, k, n, config=None):
    """Ordered representations of n as s positive k-th powers, exactly."""
    config = config or CountingConfig()
    if s < 1 or k < 1 or n < 1:
        raise ValueError("s, k and n must be at least 1")
    powers = []
    x = 1
    while x ** k <= n:
        powers.append(x ** k)
        x += 1
    estimate = s * (n + 1) * max(1, len(powers))
    if estimate > config.budget:
        raise BudgetExceeded(estimate, config.budget)
    counts = [1] + [0] * n
    for _ in range(s):
        step = [0] * (n + 1)
        for power in powers:
            for m in range(power, n + 1):
                if counts[m - power]:
                    step[m] += counts[m - power]
        counts = step
    return counts[n]


def _is_uniform_root_sum(phases):
    """True when the phase multiset visits {j/d} equally often for d >= 2.

    In that case the attached sum of unit vectors vanishes identically,
    and the caller can record an exact zero instead of float noise.
    """
    buckets = Counter(phases)
    d = len(buckets)
    if d < 2 or len(set(buckets.values())) != 1:
        return False
    return sorted(buckets) == [Fraction(j, d) for j in range(d)]


@dataclass(frozen=True)
class SeriesTruncation:
    """Partial sum over q <= q_max plus a movement diagnostic.

    movement is the spread (max minus min) of the partial sums across the
    last decade of q; it is a heuristic, not an error bound.
    """

    value: float
    q_max: int
    movement: float


def singular_series_waring(s, k, n, Q, config=None):
    """Truncation of the arithmetic factor for n as s k-th powers."""
    config = config or CountingConfig()
    if s < 1 or k < 1 or n < 1 or Q < 1:
        raise ValueError("s, k, n and Q must be at least 1")
    if Q ** 3 > config.budget:
        raise BudgetExceeded(Q ** 3, config.budget)
    total = 1.0
    partials = [total]
    for q in range(2, Q + 1):
        term = 0.0
        for a in range(1, q + 1):
            if gcd(a, q) != 1:
                continue
            phases = [Fraction(a * pow(r, k, q), q) for r in range(1, q + 1)]
            if _is_uniform_root_sum(phases):
                continue
            inner = sum((_unit(p) for p in phases), complex(0.0)) / q
            term += (inner ** s * _unit(Fraction(-n * a, q) % 1)).real
        total += term
        partials.append(total)
    # the window is the last multiplicative decade, q in (Q/10, Q]
    window = partials[max(1, Q // 10) - 1:]
    return SeriesTruncation(value=total, q_max=Q,
                            movement=max(window) - min(window))


@dataclass(frozen=True)
class ConstantsReport:
    """Truncated arithmetic and archimedean factors of the main term.

    refinement is the change in the box integral when the outer grid is
    halved; a large value means the quadrature has not settled.
    """

    series: float
    series_q: int
    integral: float
    box: int
    grid: int
    refinement: float


def _complete_sum_moment(s, k, q):
    """Sum over coprime coefficient vectors of |q^{-1} S(q, a)|^{2s}."""
    total = 0.0
    for avec in itertools.product(range(1, q + 1), repeat=k):
        if gcd(*avec, q) != 1:
            continue
        inner = complex(0.0)
        for r in range(1, q + 1):
            phase = Fraction(sum(a * pow(r, j + 1, q)
                                 for j, a in enumerate(avec)) % q, q)
            inner += _unit(phase)
        total += abs(inner / q) ** (2 * s)
    return total


def _box_integral(s, k, B, grid, inner_points):
    width = 2.0 * B / grid
    centers = [-B + width * (i + 0.5) for i in range(grid)]
    gammas = [(j + 0.5) / inner_points for j in range(inner_points)]
    rows = [[g ** (j + 1) for j in range(k)] for g in gammas]
    total = 0.0
    for beta in itertools.product(centers, repeat=k):
        inner = complex(0.0)
        for row in rows:
            angle = TWO_PI * sum(b * g for b, g in zip(beta, row))
            inner += cmath.exp(complex(0.0, angle))
        total += abs(inner / inner_points) ** (2 * s)
    return total * width ** k


def mean_value_constants(s, k, Q, B, grid, config=None):
    """Truncated singular series and singular integral of the main term."""
    config = config or CountingConfig()
    if min(s, k, Q, B, grid) < 1:
        raise ValueError("s, k, Q, B and grid must be at least 1")
    inner_points = 4 * grid
    series_cost = sum(q ** (k + 1) for q in range(1, Q + 1))
    box_cost = (grid ** k + max(1, grid // 2) ** k) * inner_points
    if series_cost + box_cost > config.budget:
        raise BudgetExceeded(series_cost + box_cost, config.budget)
    series = sum(_complete_sum_moment(s, k, q) for q in range(1, Q + 1))
    integral = _box_integral(s, k, B, grid, inner_points)
    coarse = _box_integral(s, k, B, max(1, grid // 2), inner_points)
    return ConstantsReport(series=series, series_q=Q, integral=integral,
                           box=B, grid=grid,
                           refinement=abs(integral - coarse))
