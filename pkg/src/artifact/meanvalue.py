"""Exact solution counting for symmetric power-sum systems.

The central object is the count map N(v) = number of tuples x in [1,X]^s
whose power-sum vector (sum x_i, sum x_i^2, ..., sum x_i^k) equals v.  By
orthogonality the number of solutions of

    x_1^j + ... + x_s^j = y_1^j + ... + y_s^j    (1 <= j <= k)

with all variables in [1,X] equals sum_v N(v)^2.  Restricted variants put
single variables in residue classes, or group r variables into a
conditioned block lying in pairwise distinct classes one level deeper
with a sign pattern attached.

Everything is exact integer arithmetic.  The enumeration strategies and
any thread count must produce bit-identical count maps; the tests enforce
this, so strategy choice is purely a matter of speed.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

DEFAULT_BUDGET = 500_000_000

STRATEGIES = ("direct", "symmetry-reduced", "iterated-convolution")


class BudgetExceeded(RuntimeError):
    """Estimated enumeration cost exceeds the configured budget."""

    def __init__(self, estimated, budget, detail=""):
        note = f" ({detail})" if detail else ""
        super().__init__(f"estimated cost {estimated} exceeds budget {budget}{note}")
        self.estimated = estimated
        self.budget = budget


class EmptyConstraint(ValueError):
    """A constraint is unsatisfiable for every range bound, not just this X."""


@dataclass(frozen=True)
class CountingConfig:
    """Tuning knobs shared by the counting entry points.

    budget is measured in estimated tuple enumerations.  The strategy
    thresholds steer automatic selection only; they never change results.
    """

    budget: int = DEFAULT_BUDGET
    threads: int = 1
    direct_limit: int = 4096
    convolution_factor: float = 1.0

    def __post_init__(self):
        if self.budget < 1 or self.threads < 1:
            raise ValueError("budget and threads must be positive")


@dataclass(frozen=True)
class SystemParams:
    """Degree k, variable pairs s, range [1, X]."""

    k: int
    s: int
    X: int

    def __post_init__(self):
        if self.k < 1 or self.s < 1 or self.X < 1:
            raise ValueError("k, s and X must all be at least 1")


def encode_vector(components):
    """Canonical byte encoding: count, then per component a sign byte and a
    length-prefixed big-endian magnitude.  Deterministic across platforms."""
    out = bytearray()
    out += len(components).to_bytes(2, "big")
    for value in components:
        out.append(1 if value < 0 else 0)
        mag = abs(value)
        size = (mag.bit_length() + 7) // 8
        out += size.to_bytes(2, "big")
        out += mag.to_bytes(size, "big")
    return bytes(out)


def decode_vector(data):
    n = int.from_bytes(data[0:2], "big")
    pos = 2
    comps = []
    for _ in range(n):
        sign = -1 if data[pos] else 1
        size = int.from_bytes(data[pos + 1:pos + 3], "big")
        pos += 3
        comps.append(sign * int.from_bytes(data[pos:pos + size], "big"))
        pos += size
    if pos != len(data):
        raise ValueError("trailing bytes in encoded vector")
    return tuple(comps)


@dataclass(frozen=True)
class PowerSumVector:
    """Vector of power sums, component j = sum_i x_i^j for j = 1..k."""

    components: tuple

    @classmethod
    def of_tuple(cls, values, k):
        return cls(tuple(sum(x ** j for x in values) for j in range(1, k + 1)))

    def canonical_bytes(self):
        return encode_vector(self.components)


class CountMap:
    """Multiplicity map from power-sum tuples to exact positive counts.

    total tracks the weighted number of tuples represented; the counting
    entry points assert it against the independently computed tuple count.
    """

    __slots__ = ("entries", "total")

    def __init__(self):
        self.entries = {}
        self.total = 0

    def add(self, key, weight=1):
        self.entries[key] = self.entries.get(key, 0) + weight
        self.total += weight

    def merge(self, other):
        for key, count in other.entries.items():
            self.entries[key] = self.entries.get(key, 0) + count
        self.total += other.total

    def sum_of_squares(self):
        return sum(c * c for c in self.entries.values())

    def inner(self, other):
        a, b = self.entries, other.entries
        if len(b) < len(a):
            a, b = b, a
        return sum(c * b[key] for key, c in a.items() if key in b)

    def entries_sorted(self):
        return sorted(self.entries.items())

    def __eq__(self, other):
        return isinstance(other, CountMap) and self.entries == other.entries

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class ResidueConstraint:
    """Restrict one variable to the class x == xi (mod p^c), xi in [1, p^c]."""

    p: int
    c: int
    xi: int

    def __post_init__(self):
        if self.p < 2 or self.c < 0:
            raise ValueError("need p >= 2 and c >= 0")
        if not 1 <= self.xi <= self.p ** self.c:
            raise ValueError("class representative must lie in [1, p^c]")

    def domain(self, x_max):
        m = self.p ** self.c
        first = (self.xi - 1) % m + 1
        return list(range(first, x_max + 1, m))


@dataclass(frozen=True)
class ConditionedBlock:
    """r variables in classes above xi (mod p^c): each variable sits in a
    class mod p^{c+1} reducing to xi, the r classes pairwise distinct, and
    variable i carries sign sigma_i on its power sums."""

    p: int
    c: int
    xi: int
    r: int
    sigma: tuple

    def __post_init__(self):
        if self.p < 2 or self.c < 0 or self.r < 1:
            raise ValueError("need p >= 2, c >= 0, r >= 1")
        if not 1 <= self.xi <= self.p ** self.c:
            raise ValueError("base class must lie in [1, p^c]")
        if len(self.sigma) != self.r or any(e not in (1, -1) for e in self.sigma):
            raise ValueError("sigma must be a length-r tuple over {1, -1}")
        if self.r > self.p:
            # only p classes mod p^{c+1} lie above xi, so pairwise
            # distinctness is unsatisfiable for every X
            raise EmptyConstraint(f"block arity {self.r} exceeds the {self.p} "
                                  f"available classes")

    def class_representatives(self):
        base = (self.xi - 1) % self.p ** self.c + 1
        step = self.p ** self.c
        return [base + t * step for t in range(self.p)]


def _power_vector(x, k, sign=1):
    return tuple(sign * x ** j for j in range(1, k + 1))


def _multinomial(values):
    w = math.factorial(len(values))
    for m in Counter(values).values():
        w //= math.factorial(m)
    return w


def _chunks(n, pieces):
    pieces = max(1, min(pieces, n))
    size, extra = divmod(n, pieces)
    out, start = [], 1
    for i in range(pieces):
        stop = start + size + (1 if i < extra else 0)
        out.append(range(start, stop))
        start = stop
    return out


def _direct_chunk(params, chunk):
    k, s, X = params.k, params.s, params.X
    vecs = {x: _power_vector(x, k) for x in range(1, X + 1)}
    cmap = CountMap()
    for x1 in chunk:
        head = vecs[x1]
        for rest in itertools.product(range(1, X + 1), repeat=s - 1):
            vec = head
            for x in rest:
                vec = tuple(a + b for a, b in zip(vec, vecs[x]))
            cmap.add(vec)
    return cmap


def _symmetry_chunk(params, chunk):
    k, s, X = params.k, params.s, params.X
    vecs = {x: _power_vector(x, k) for x in range(1, X + 1)}
    cmap = CountMap()
    for x1 in chunk:
        head = vecs[x1]
        for rest in itertools.combinations_with_replacement(range(x1, X + 1), s - 1):
            vec = head
            for x in rest:
                vec = tuple(a + b for a, b in zip(vec, vecs[x]))
            cmap.add(vec, _multinomial((x1,) + rest))
    return cmap


def _convolve(cmap, vectors, weight=1):
    out = CountMap()
    entries = out.entries
    for key, count in cmap.entries.items():
        w = count * weight
        for vec in vectors:
            new = tuple(a + b for a, b in zip(key, vec))
            entries[new] = entries.get(new, 0) + w
    out.total = cmap.total * len(vectors) * weight
    return out


def _unit_map(k):
    cmap = CountMap()
    cmap.add((0,) * k)
    return cmap


def _convolution_map(params):
    k, s, X = params.k, params.s, params.X
    singles = [_power_vector(x, k) for x in range(1, X + 1)]
    cmap = _unit_map(k)
    for _ in range(s):
        cmap = _convolve(cmap, singles)
    return cmap


def _distinct_vector_bound(k, s, X):
    by_range = 1
    for j in range(1, k + 1):
        by_range *= s * (X ** j - 1) + 1
    return min(by_range, math.comb(X + s - 1, s))


def estimate_cost(params, strategy):
    """Estimated tuple enumerations for one strategy; budget currency."""
    k, s, X = params.k, params.s, params.X
    if strategy == "direct":
        return X ** s
    if strategy == "symmetry-reduced":
        return math.comb(X + s - 1, s)
    if strategy == "iterated-convolution":
        return sum(_distinct_vector_bound(k, i, X) * X for i in range(1, s)) or X
    raise ValueError(f"unknown strategy {strategy!r}")


def _pick_strategy(params, config):
    if estimate_cost(params, "direct") <= config.direct_limit:
        return "direct"
    conv = estimate_cost(params, "iterated-convolution")
    sym = estimate_cost(params, "symmetry-reduced")
    # exact comparison: the estimates are unbounded ints
    if Fraction(conv) < Fraction(config.convolution_factor) * sym:
        return "iterated-convolution"
    return "symmetry-reduced"


def build_count_map(params, strategy="auto", config=None):
    """CountMap of all s-tuples from [1,X]^s keyed by power-sum vector."""
    config = config or CountingConfig()
    if strategy == "auto":
        strategy = _pick_strategy(params, config)
    cost = estimate_cost(params, strategy)
    if cost > config.budget:
        raise BudgetExceeded(cost, config.budget, f"strategy {strategy}")
    if strategy == "iterated-convolution":
        cmap = _convolution_map(params)
    else:
        worker = _direct_chunk if strategy == "direct" else _symmetry_chunk
        pieces = _chunks(params.X, config.threads)
        cmap = CountMap()
        if config.threads > 1 and len(pieces) > 1:
            with ThreadPoolExecutor(max_workers=config.threads) as pool:
                futures = [pool.submit(worker, params, c) for c in pieces]
                # merge in submission order, never completion order
                for fut in futures:
                    cmap.merge(fut.result())
        else:
            for chunk in pieces:
                cmap.merge(worker(params, chunk))
    assert cmap.total == params.X ** params.s
    return cmap


def count_j(params, strategy="auto", config=None):
    """Exact number of solutions of the 2s-variable power-sum system."""
    return build_count_map(params, strategy, config).sum_of_squares()


def diagonal_oracle(params):
    """Exact count of solution pairs whose variable multisets coincide.

    Independent of k.  Equals count_j whenever s <= k, since the first s
    power sums determine the multiset.
    """
    s, X = params.s, params.X
    total = 0
    for m in itertools.combinations_with_replacement(range(1, X + 1), s):
        w = _multinomial(m)
        total += w * w
    return total


def _normalize_constraints(constraints, s):
    if constraints is None:
        return [None] * (2 * s)
    if isinstance(constraints, ResidueConstraint):
        return [constraints] * (2 * s)
    constraints = list(constraints)
    if len(constraints) != 2 * s:
        raise ValueError(f"need one constraint slot per variable: {2 * s}")
    return constraints


def _block_tuple_count(block, x_max):
    """Number of admissible r-tuples for one block, without enumerating."""
    sizes = [len(ResidueConstraint(block.p, block.c + 1, rep).domain(x_max))
             for rep in block.class_representatives()]
    total = 0
    for chosen in itertools.permutations(sizes, block.r):
        total += math.prod(chosen)
    return total


def _block_map(block, k, x_max):
    domains = {rep: ResidueConstraint(block.p, block.c + 1, rep).domain(x_max)
               for rep in block.class_representatives()}
    signed = {
        (rep, sign): [_power_vector(x, k, sign) for x in domains[rep]]
        for rep in domains for sign in (1, -1)
    }
    out = CountMap()
    for reps in itertools.permutations(domains, block.r):
        partial = _unit_map(k)
        for rep, sign in zip(reps, block.sigma):
            vectors = signed[(rep, sign)]
            if not vectors:
                partial = None
                break
            partial = _convolve(partial, vectors)
        if partial is not None:
            out.merge(partial)
    return out


def _side_map(k, x_max, side_constraints, blocks):
    cmap = _unit_map(k)
    for constraint in side_constraints:
        domain = (range(1, x_max + 1) if constraint is None
                  else constraint.domain(x_max))
        if not domain:
            return CountMap()
        cmap = _convolve(cmap, [_power_vector(x, k) for x in domain])
    for block in blocks:
        bmap = _block_map(block, k, x_max)
        if not bmap.entries:
            return CountMap()
        merged = CountMap()
        for key, count in bmap.entries.items():
            part = _convolve(cmap, [key], weight=count)
            merged.merge(part)
        cmap = merged
    return cmap


def _restricted_estimate(k, x_max, side_constraints, blocks):
    est = 1
    for constraint in side_constraints:
        est *= x_max if constraint is None else len(constraint.domain(x_max))
    for block in blocks:
        est *= _block_tuple_count(block, x_max)
    return est


def _restricted_count(k, x_max, left_constraints, right_constraints, blocks,
                      config):
    config = config or CountingConfig()
    est_left = _restricted_estimate(k, x_max, left_constraints, blocks)
    est_right = _restricted_estimate(k, x_max, right_constraints, blocks)
    if est_left + est_right > config.budget:
        raise BudgetExceeded(est_left + est_right, config.budget,
                             "restricted count")
    left = _side_map(k, x_max, left_constraints, blocks)
    assert left.total == est_left
    if not left.entries:
        return 0
    if left_constraints == right_constraints:
        return left.sum_of_squares()
    right = _side_map(k, x_max, right_constraints, blocks)
    assert right.total == est_right
    return left.inner(right)


def count_j_restricted(params, constraints=None, blocks=(), config=None):
    """Exact count with per-variable residue constraints and sign blocks.

    constraints: None, one ResidueConstraint broadcast to all 2s variables,
    or a list of 2s entries (x side then y side; None = unconstrained).
    Each block contributes r extra variables to both sides, with the same
    base class and sign pattern on each side.  A constraint or block class
    empty in [1,X] gives 0; structural impossibility (block arity above p)
    raises EmptyConstraint at construction.
    """
    slots = _normalize_constraints(constraints, params.s)
    return _restricted_count(params.k, params.X, slots[:params.s],
                             slots[params.s:], tuple(blocks), config)


def block_plain_count(params, block, eta_constraint, config=None):
    """Count with one conditioned block against 2s plain constrained
    variables; both sides carry the block once."""
    return count_j_restricted(params, eta_constraint, (block,), config)


def block_block_count(params, block_a, block_b, config=None):
    """Count with block_a once per side and s/r copies of block_b per side;
    no unconditioned variables.  Requires block_b.r to divide s."""
    if params.s % block_b.r:
        raise ValueError("block arity must divide s")
    copies = params.s // block_b.r
    blocks = (block_a,) + (block_b,) * copies
    return _restricted_count(params.k, params.X, [], [], blocks, config)


def _sign_patterns(r):
    return list(itertools.product((1, -1), repeat=r))


def block_plain_max(params, p, a, b, r, config=None):
    """Maximize block_plain_count over base class xi in [1,p^a], plain
    class eta in [1,p^b] with eta != xi (mod p), and sign pattern sigma."""
    best, witness = None, None
    for xi in range(1, p ** a + 1):
        for eta in range(1, p ** b + 1):
            if (eta - xi) % p == 0:
                continue
            constraint = ResidueConstraint(p, b, eta)
            for sigma in _sign_patterns(r):
                block = ConditionedBlock(p, a, xi, r, sigma)
                value = block_plain_count(params, block, constraint, config)
                if best is None or value > best:
                    best, witness = value, {"xi": xi, "eta": eta, "sigma": sigma}
    return best, witness


def block_block_max(params, p, a, b, r, config=None):
    """Maximize block_block_count over xi, eta (eta != xi mod p), sigma, tau."""
    best, witness = None, None
    for xi in range(1, p ** a + 1):
        for eta in range(1, p ** b + 1):
            if (eta - xi) % p == 0:
                continue
            for sigma in _sign_patterns(r):
                block_a = ConditionedBlock(p, a, xi, r, sigma)
                for tau in _sign_patterns(r):
                    block_b = ConditionedBlock(p, b, eta, r, tau)
                    value = block_block_count(params, block_a, block_b, config)
                    if best is None or value > best:
                        best, witness = value, {"xi": xi, "eta": eta,
                                                "sigma": sigma, "tau": tau}
    return best, witness


@dataclass(frozen=True)
class HolderCheck:
    ok: bool
    j_s: int
    j_t: int
    s: int
    t: int


def holder_check(params, t, config=None):
    """Verify J_s(X)^t <= J_t(X)^s in exact integers (t >= s)."""
    if t < params.s:
        raise ValueError("t must be at least s")
    j_s = count_j(params, config=config)
    j_t = count_j(SystemParams(params.k, t, params.X), config=config)
    return HolderCheck(j_s ** t <= j_t ** params.s, j_s, j_t, params.s, t)


@dataclass(frozen=True)
class LadderResult:
    k: int
    s: int
    rows: tuple  # (X, J) pairs, ascending X
    slope: float

    def to_csv(self):
        lines = ["X,J,log2X,log2J"]
        for X, J in self.rows:
            lines.append(f"{X},{J},{math.log2(X)},{math.log2(J)}")
        return "\n".join(lines) + "\n"


def scaling_ladder(k, s, x_values, strategy="auto", config=None):
    """Exact J at each X plus the least-squares slope of log2 J on log2 X."""
    x_values = sorted(x_values)
    if len(x_values) < 2:
        raise ValueError("need at least two ladder points")
    rows = []
    for X in x_values:
        try:
            rows.append((X, count_j(SystemParams(k, s, X), strategy, config)))
        except BudgetExceeded as exc:
            raise BudgetExceeded(exc.estimated, exc.budget,
                                 f"first infeasible X={X}") from exc
    us = [math.log2(X) for X, _ in rows]
    ws = [math.log2(J) for _, J in rows]
    ubar = sum(us) / len(us)
    wbar = sum(ws) / len(ws)
    denom = sum((u - ubar) ** 2 for u in us)
    slope = sum((u - ubar) * (w - wbar) for u, w in zip(us, ws)) / denom
    return LadderResult(k, s, tuple(rows), slope)
