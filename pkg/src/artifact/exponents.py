"""Closed-form exponent calculators and the descent recurrence ledger.

Everything here is exact rational arithmetic.  The calculators package the
admissible-exponent statements proved elsewhere in the project's counting
modules: permissible exponents for the power-sum system, thresholds for the
asymptotic formula in Waring's problem, and a handful of derived exponents
(Weyl sums, equidistribution, Tarry's problem, Hua-style moment thresholds).

The ledger replays the descent recurrence that drives the main iteration.
A replay fixes the growth regime ("k": the classical regime with s = r k,
"rho": the quasi-diagonal regime with s = r(k-r+1)), picks an admissible
perturbation h_n at every step, evolves the auxiliary sequences, and checks
every inequality the surrounding argument relies on.  All sequence values
are Fractions because the recurrences divide by r.
"""

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .exactmath import ExactRational


class OutOfRange(ValueError):
    """A parameter violates the hypotheses attached to an exponent."""


class InvalidChoice(ValueError):
    """A ledger perturbation leaves its admissible interval."""


LEDGER_MODES = ("k", "rho")
KAPPA_MODES = ("quasi-diagonal", "near-optimal")
BOUND_KINDS = ("mean-value", "waring", "weyl", "tarry", "hua")


@dataclass(frozen=True)
class ExponentBound:
    """One admissible exponent together with the s-range it is proved for.

    valid_s_range is a closed interval (lo, hi); hi is None when the bound
    holds for every s above lo.
    """

    exponent: ExactRational
    valid_s_range: tuple
    k: int
    source: str
    kind: str

    def __post_init__(self):
        lo, hi = self.valid_s_range
        if lo < 1 or (hi is not None and hi < lo):
            raise OutOfRange("empty validity range for %s" % self.source)
        if self.kind not in BOUND_KINDS:
            raise ValueError("unknown bound kind %r" % (self.kind,))

    def applies_to(self, s):
        lo, hi = self.valid_s_range
        return lo <= s and (hi is None or s <= hi)


def _require(condition, message):
    if not condition:
        raise OutOfRange(message)


def nu(r, k):
    """Quasi-diagonal excess (r-1)/(k-r), valid for s <= r(k-r+2)."""
    _require(k >= 3, "k must be at least 3")
    _require(1 <= r <= min(k - 2, k // 2 + 1),
             "r must satisfy 1 <= r <= min(k-2, k/2+1)")
    return ExponentBound(
        exponent=Fraction(r - 1, k - r),
        valid_s_range=(1, r * (k - r + 2)),
        k=k,
        source="quasi-diagonal r=%d" % r,
        kind="mean-value")


def delta(t, k):
    """Excess over the critical exponent, valid for s >= (k-t)(k+1)."""
    _require(k >= 3, "k must be at least 3")
    _require(1 <= t <= k - 1, "t must satisfy 1 <= t <= k-1")
    return ExponentBound(
        exponent=Fraction(t * (t - 1), 2) * Fraction(k + 1, k - 1),
        valid_s_range=(max(1, (k - t) * (k + 1)), None),
        k=k,
        source="near-main t=%d" % t,
        kind="mean-value")


def _critical(k):
    return Fraction(k * (k + 1), 2)


def envelope(k, s):
    """Every admissible exponent for J at (k, s), sharpest first.

    Direct bounds come first in construction order, then interpolated ones,
    and the final list is sorted by exponent with that order as tie-break,
    so the head of the list is the minimum.
    """
    _require(k >= 3, "k must be at least 3")
    _require(s >= 1, "s must be at least 1")
    bounds = [ExponentBound(Fraction(2 * s), (1, None), k, "trivial",
                            "mean-value")]
    if s >= k * k - 1:
        bounds.append(ExponentBound(2 * s - _critical(k), (k * k - 1, None),
                                    k, "main-range", "mean-value"))
    for r in range(1, min(k - 2, k // 2 + 1) + 1):
        bound = nu(r, k)
        if bound.applies_to(s):
            bounds.append(ExponentBound(s + bound.exponent,
                                        bound.valid_s_range, k,
                                        bound.source, "mean-value"))
    midpoint_top = (k * k + 4 * k) // 4
    if k >= 4 and s <= midpoint_top:
        bounds.append(ExponentBound(Fraction(s + 1), (1, midpoint_top), k,
                                    "quasi-diagonal midpoint", "mean-value"))
    for t in range(1, k):
        excess = delta(t, k)
        if excess.applies_to(s):
            bounds.append(ExponentBound(
                2 * s - _critical(k) + excess.exponent,
                excess.valid_s_range, k, excess.source, "mean-value"))

    # downward interpolation from every anchor above s: J at s is at most
    # the anchor bound raised to the power s/anchor
    anchors = []
    if s < k * k - 1:
        anchors.append((k * k - 1, 2 * (k * k - 1) - _critical(k),
                        "main-range"))
    for r in range(1, min(k - 2, k // 2 + 1) + 1):
        top = r * (k - r + 2)
        if s < top:
            anchors.append((top, top + nu(r, k).exponent,
                            "quasi-diagonal r=%d" % r))
    if k >= 4 and s < midpoint_top:
        anchors.append((midpoint_top, Fraction(midpoint_top + 1),
                        "quasi-diagonal midpoint"))
    for t in range(1, k):
        bottom = (k - t) * (k + 1)
        if s < bottom:
            anchors.append((bottom,
                            2 * bottom - _critical(k) + delta(t, k).exponent,
                            "near-main t=%d" % t))
    for anchor, lam, origin in anchors:
        bounds.append(ExponentBound(Fraction(s, anchor) * lam, (s, s), k,
                                    "interpolated from %s" % origin,
                                    "mean-value"))
    return sorted(bounds, key=lambda bound: bound.exponent)


def kappa_params(k, r, mode):
    """The (s_0, kappa) pair driving one regime of the descent.

    quasi-diagonal: s_0 = r(k-r+1), kappa = s_0 + r - (r-1)/(k-r).
    near-optimal:   s_0 = r k,       kappa = (rk - r(r+1)/2)(k+1)/(k-1).
    """
    if mode not in KAPPA_MODES:
        raise ValueError("mode must be one of %s" % (KAPPA_MODES,))
    _require(k >= 3, "k must be at least 3")
    if mode == "quasi-diagonal":
        _require(1 <= r <= min(k - 2, k // 2 + 1),
                 "r must satisfy 1 <= r <= min(k-2, k/2+1)")
        s0 = r * (k - r + 1)
        kappa = s0 + r - Fraction(r - 1, k - r)
    else:
        _require(1 <= r <= k - 1, "r must satisfy 1 <= r <= k-1")
        s0 = r * k
        kappa = (r * k - Fraction(r * (r + 1), 2)) * Fraction(k + 1, k - 1)
    assert kappa <= s0 + r
    return s0, kappa


@dataclass(frozen=True)
class LedgerState:
    """One step of the descent: indices, perturbation, auxiliary values.

    h is the perturbation chosen at this step; it is None at the final
    step, where no further descent happens.
    """

    n: int
    a: int
    b: int
    h: Optional[int]
    psi: ExactRational
    c: ExactRational
    gamma: ExactRational


@dataclass(frozen=True)
class LedgerReport:
    gamma_nonnegative: bool
    c_within_growth: bool
    c_closed_form: bool
    descent_inequality: bool
    psi_lower_bound: bool
    b_lower_bound: bool
    greedy_b_is_power: Optional[bool]

    @property
    def ok(self):
        checks = (self.gamma_nonnegative, self.c_within_growth,
                  self.c_closed_form, self.descent_inequality,
                  self.psi_lower_bound, self.b_lower_bound,
                  self.greedy_b_is_power)
        return all(value for value in checks if value is not None)


@dataclass(frozen=True)
class LedgerTrace:
    mode: str
    k: int
    r: int
    s: int
    kappa: ExactRational
    theta: float
    steps: int
    states: tuple
    report: LedgerReport


def _resolve_choices(h_choices, steps):
    """Turn the h_choices argument into a draw function and an initial h."""
    if h_choices is None:
        return (lambda n, limit: 0), 0
    if isinstance(h_choices, int):
        rng = random.Random(h_choices)
        return (lambda n, limit: rng.randint(0, limit)), rng.randint(0, 1)
    explicit = list(h_choices)
    if len(explicit) != steps + 1:
        raise InvalidChoice(
            "need %d perturbations (initial plus one per step), got %d"
            % (steps + 1, len(explicit)))
    return (lambda n, limit: explicit[n + 1]), explicit[0]


def ledger_replay(k, r, mode, steps, h_choices=None):
    """Evolve the descent recurrence and check every inequality it uses.

    h_choices is None for the all-zero trajectory, an integer seed for a
    random admissible trajectory, or an explicit sequence
    (h_initial, h_0, ..., h_{steps-1}) with h_initial in {0, 1}.
    """
    if mode not in LEDGER_MODES:
        raise ValueError("mode must be one of %s" % (LEDGER_MODES,))
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if mode == "k":
        s0, kappa = kappa_params(k, r, "near-optimal")
        growth = k
    else:
        s0, kappa = kappa_params(k, r, "quasi-diagonal")
        growth = k - r + 1
    s = r * growth
    assert s == s0

    draw, h_initial = _resolve_choices(h_choices, steps)
    if h_initial not in (0, 1):
        raise InvalidChoice("initial perturbation must be 0 or 1, got %r"
                            % (h_initial,))
    theta = float(Fraction(1, growth) ** (steps + 2)) / math.sqrt(steps)

    a, b = 0, 1 + h_initial
    psi, c, gamma = Fraction(0), Fraction(1), Fraction((2 * s - r + 1)
                                                       * h_initial)
    h_prev = h_initial
    states = []
    for n in range(steps):
        limit = 2 * (growth - 1) * b
        h = draw(n, limit)
        if not 0 <= h <= limit:
            raise InvalidChoice(
                "step %d perturbation %r outside [0, %d]" % (n, h, limit))
        states.append(LedgerState(n, a, b, h, psi, c, gamma))
        a, b = b, growth * b + h
        psi = growth * psi + (growth - 1) * states[-1].b
        c = growth * (c + 1)
        gamma = growth * gamma + (2 * s - r + 1) * h - s * h_prev
        h_prev = h
    states.append(LedgerState(steps, a, b, None, psi, c, gamma))

    c_shape = Fraction(2 * s - r, s - r)
    c_offset = Fraction(s, s - r)
    all_zero = h_initial == 0 and all(st.h == 0 for st in states[:-1])
    report = LedgerReport(
        gamma_nonnegative=all(st.gamma >= 0 for st in states),
        c_within_growth=all(st.c <= 3 * growth ** st.n for st in states),
        c_closed_form=all(
            st.c == c_shape * growth ** st.n - c_offset for st in states),
        descent_inequality=all(
            states[m].gamma >= (2 * s - r + 1) * states[m].b
            - s * states[m - 1].b - (2 * s - 2 * r + 1) * growth ** m
            for m in range(1, steps + 1)),
        psi_lower_bound=all(
            st.psi >= st.n * (growth - 1) * growth ** (st.n - 1)
            for st in states if st.n >= 1),
        b_lower_bound=all(st.b >= growth ** st.n for st in states),
        greedy_b_is_power=(
            all(st.b == growth ** st.n for st in states)
            if all_zero else None))
    return LedgerTrace(mode, k, r, s, kappa, theta, steps, tuple(states),
                       report)


@dataclass(frozen=True)
class WaringThreshold:
    """Threshold for the asymptotic formula, with route provenance.

    first is the power-of-two route, second the interpolation route; the
    value is their minimum.  provenance is "first", "second", or "both"
    when the routes tie.  integral_boundary flags the rounding edge case
    where the first route's inner maximum is an exact integer.
    """

    k: int
    value: int
    first: int
    second: int
    first_at: int
    second_at: tuple
    provenance: str
    integral_boundary: bool


def _first_route_terms(k):
    for j in range(0, k - 1):
        if 2 ** j > k * k - k - 1:
            break
        yield j, Fraction(2 * (k - 1) * (j + 1) - 2 ** (j + 1), k - j)


def _second_route_terms(k, halved):
    for t in range(1, k):
        for m in range(1, k + 1):
            if 2 * (t - 1) * (k + 1) + m * (m - 1) >= 2 * k * k - 2:
                continue
            numerator = Fraction((t - 1) * (k + 1)
                                 - Fraction(m * (m - 1), 2))
            if not halved:
                numerator *= 2
            weight = 1 + Fraction(t * (t - 1), 2) \
                * Fraction(k + 1, k - 1) / m
            yield (m, t), numerator / weight


def gtilde(k):
    """Least s beyond which the Waring asymptotic formula is guaranteed."""
    _require(k >= 3, "k must be at least 3")
    first_at, first_term = max(_first_route_terms(k),
                               key=lambda item: (item[1], -item[0]))
    first = 2 * k * k - 2 * k + 1 - math.ceil(first_term)
    second_at, second_term = max(
        _second_route_terms(k, halved=False),
        key=lambda item: (item[1], (-item[0][1], -item[0][0])))
    second = 2 * k * k - 1 - math.ceil(second_term)
    value = min(first, second)
    if first != second:
        provenance = "first" if first < second else "second"
    else:
        provenance = "both"
    return WaringThreshold(
        k=k, value=value, first=first, second=second, first_at=first_at,
        second_at=second_at, provenance=provenance,
        integral_boundary=first_term.denominator == 1)


def gtilde_plus(k):
    """Threshold for the asymptotic formula holding for almost all n."""
    _require(k >= 3, "k must be at least 3")
    first_term = max(term for _, term in (
        (j, Fraction((k - 1) * (j + 1) - 2 ** j, k - j))
        for j, _ in _first_route_terms(k)))
    first = k * k - k + 1 - math.ceil(first_term)
    second_term = max(term for _, term in _second_route_terms(k, halved=True))
    second = k * k - math.ceil(second_term)
    return min(first, second)


@dataclass(frozen=True)
class ThetaRow:
    k: int
    theta: int
    bound: int
    consistent: bool


def theta_table(k):
    """Piecewise saving theta_k with the implied threshold, cross-checked."""
    _require(k >= 6, "the table starts at k = 6")
    if k == 6:
        theta = 8
    elif k <= 13:
        theta = 9
    elif k <= 19:
        theta = 10
    else:
        theta = 12
    bound = 2 * k * k - 2 * k - theta
    return ThetaRow(k=k, theta=theta, bound=bound,
                    consistent=gtilde(k).value <= bound)


def tarry_bound(k):
    """Smallest proven s for Tarry's problem, via the exact grid scan."""
    _require(k >= 2, "k must be at least 2")
    t = 1
    while (t + 1) * t * (k + 2) < 2 * k * (k + 1):
        t += 1
    return (k + 1 - t) * (k + 2)


def misc_exponents(k):
    """Derived exponents, keyed by symbol, each under its own hypothesis.

    sigma: Weyl-sum saving, 1/(2k(k-2)) (k >= 4).
    tau: polynomial equidistribution saving, 1/(4k(k-2)) (k >= 4).
    tarry: Tarry's problem variable count (k >= 2).
    C: Hua-style moment threshold for the full phase polynomial (k >= 3).
    S: the same threshold with the degree k-1 term removed (k >= 3).
    """
    _require(k >= 2, "k must be at least 2")
    values = {"tarry": tarry_bound(k)}
    if k >= 3:
        values["C"] = 2 * k * k - 2
        values["S"] = 2 * k * k - 2 * k
    if k >= 4:
        values["sigma"] = Fraction(1, 2 * k * (k - 2))
        values["tau"] = Fraction(1, 4 * k * (k - 2))
    return values
