"""Operation terms and the construction chain

    quasi majority + quasi Maltsev  ->  generalized pairing GP(n, n)
    + fully symmetric operations    ->  symmetric GP  ->  compatible
    generalized minorities          ->  totally symmetric operations.

Terms are immutable DAGs.  Two evaluation paths exist: ``evaluate`` walks the
DAG for a single tuple with a per-call memo, and ``tabulate`` computes whole
value tables bottom-up with numpy.  The pipeline uses tables; tests compare
both paths.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .conditions import FiniteOperation, _encode, make_condition, op_satisfies, tuple_digits
from .errors import BudgetExceeded

__all__ = [
    "Term", "Base", "Projection", "Minor", "Composition", "Symmetrize", "CountFunction",
    "base", "projection", "minor", "compose", "symmetrize", "evaluate", "tabulate",
    "to_operation", "check_gp", "check_gp_literal", "gp_lift_position", "gp_lift_arity",
    "maltsev_as_gp32", "build_gp", "symmetrize_gp", "build_compatible_gmins", "build_ts",
    "even_ts", "boolean_fs_family", "odd_subsets", "pipeline", "PipelineReport",
    "BOOLEAN_MAJORITY", "XOR3",
]

TABLE_BUDGET = 1 << 20
SYMMETRIZE_BUDGET = 10**5
MAX_GP_ARITY = 15


class VerificationError(AssertionError):
    """A constructed operation failed the condition it was built to satisfy."""


# terms ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Term:
    arity: int
    domain_size: int


@dataclass(frozen=True, eq=False)
class Base(Term):
    op: FiniteOperation = None


@dataclass(frozen=True, eq=False)
class Projection(Term):
    index: int = 0


@dataclass(frozen=True, eq=False)
class Minor(Term):
    """``inner(c[sigma[0]], ..., c[sigma[n-1]])`` as an ``arity``-ary term."""
    inner: Term = None
    sigma: tuple[int, ...] = ()


@dataclass(frozen=True, eq=False)
class Composition(Term):
    outer: Term = None
    inners: tuple[Term, ...] = ()


@dataclass(frozen=True)
class CountFunction:
    """A symmetric rule: value from the exact multiplicity of each domain value.

    ``rule`` receives a tuple of ``domain_size`` integers summing to
    ``family_size``.
    """

    domain_size: int
    family_size: int
    rule: Callable[[tuple[int, ...]], int] = field(compare=False)
    name: str = "count"

    def __call__(self, counts: Sequence[int]) -> int:
        counts = tuple(int(c) for c in counts)
        if len(counts) != self.domain_size or sum(counts) != self.family_size:
            raise ValueError(f"multiplicities {counts} do not fit family {self.family_size}")
        return int(self.rule(counts))

    def is_idempotent(self) -> bool:
        for v in range(self.domain_size):
            counts = [0] * self.domain_size
            counts[v] = self.family_size
            if self(counts) != v:
                return False
        return True

    def as_operation(self) -> FiniteOperation:
        """The fully symmetric operation of arity ``family_size`` this rule defines."""
        d, n = self.domain_size, self.family_size
        if d ** n > TABLE_BUDGET:
            raise BudgetExceeded("count function table", TABLE_BUDGET)
        digits = tuple_digits(d, n)
        counts = np.stack([(digits == v).sum(axis=1) for v in range(d)], axis=1)
        keys, inverse = np.unique(counts, axis=0, return_inverse=True)
        values = np.array([self(k) for k in keys], dtype=np.int64)
        return FiniteOperation(d, n, values[inverse.ravel()])


@dataclass(frozen=True, eq=False)
class Symmetrize(Term):
    """``count`` applied to the multiset ``{inner(c_s) : s in S_n}``."""
    count: CountFunction = None
    inner: Term = None


def base(op: FiniteOperation) -> Base:
    return Base(op.arity, op.domain_size, op)


def projection(domain_size: int, arity: int, index: int) -> Projection:
    if not 0 <= index < arity:
        raise ValueError("projection index out of range")
    return Projection(arity, domain_size, index)


def _as_term(t) -> Term:
    return base(t) if isinstance(t, FiniteOperation) else t


def minor(inner, sigma: Sequence[int], arity: int | None = None) -> Minor:
    """Minor by the index map ``sigma`` (0-based, one entry per inner argument)."""
    inner = _as_term(inner)
    sigma = tuple(int(s) for s in sigma)
    if len(sigma) != inner.arity:
        raise ValueError("sigma must have one entry per inner argument")
    arity = arity if arity is not None else (max(sigma) + 1 if sigma else 1)
    if any(not 0 <= s < arity for s in sigma):
        raise ValueError("sigma leaves the argument range")
    return Minor(arity, inner.domain_size, inner, sigma)


def compose(outer, inners: Sequence) -> Composition:
    outer = _as_term(outer)
    inners = tuple(_as_term(t) for t in inners)
    if len(inners) != outer.arity:
        raise ValueError("need one inner term per outer argument")
    if len({t.arity for t in inners}) != 1:
        raise ValueError("inner terms must share an arity")
    if any(t.domain_size != outer.domain_size for t in inners):
        raise ValueError("domain mismatch")
    return Composition(inners[0].arity, outer.domain_size, outer, inners)


def symmetrize(count: CountFunction, inner) -> Symmetrize:
    inner = _as_term(inner)
    if count.family_size != math.factorial(inner.arity):
        raise ValueError(f"count function must be sized for {inner.arity}! arguments")
    if count.domain_size != inner.domain_size:
        raise ValueError("domain mismatch")
    return Symmetrize(inner.arity, inner.domain_size, count, inner)


# evaluation ----------------------------------------------------------------

def _distinct_permutations(values: Sequence[int]):
    counts: dict[int, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    keys = sorted(counts)
    n = len(values)
    out = [0] * n

    def rec(pos):
        if pos == n:
            yield tuple(out)
            return
        for k in keys:
            if counts[k]:
                counts[k] -= 1
                out[pos] = k
                yield from rec(pos + 1)
                counts[k] += 1

    yield from rec(0)


def _multiplicity_weight(values: Sequence[int]) -> int:
    w = 1
    for v in set(values):
        w *= math.factorial(list(values).count(v))
    return w


def evaluate(term: Term, args: Sequence[int], memo: dict | None = None) -> int:
    """Value of ``term`` at ``args``, memoized by (node, tuple) for this call tree."""
    args = tuple(int(a) for a in args)
    if len(args) != term.arity or any(not 0 <= a < term.domain_size for a in args):
        raise ValueError("argument tuple does not fit the term")
    return _eval(term, args, {} if memo is None else memo)


def _eval(term: Term, args: tuple[int, ...], memo: dict) -> int:
    key = (id(term), args)
    hit = memo.get(key)
    if hit is not None:
        return hit[0]
    if isinstance(term, Base):
        val = term.op(*args)
    elif isinstance(term, Projection):
        val = args[term.index]
    elif isinstance(term, Minor):
        val = _eval(term.inner, tuple(args[s] for s in term.sigma), memo)
    elif isinstance(term, Composition):
        inner_vals = tuple(_eval(t, args, memo) for t in term.inners)
        val = _eval(term.outer, inner_vals, memo)
    elif isinstance(term, Symmetrize):
        counts = [0] * term.domain_size
        weight = _multiplicity_weight(args)
        distinct = 0
        for perm in _distinct_permutations(args):
            distinct += 1
            if distinct > SYMMETRIZE_BUDGET:
                raise BudgetExceeded("distinct permuted tuples", SYMMETRIZE_BUDGET)
            counts[_eval(term.inner, perm, memo)] += weight
        val = term.count(counts)
    else:
        raise TypeError(f"unknown term node {type(term).__name__}")
    memo[key] = (val, term)  # the node reference keeps id() stable for the session
    return val


def tabulate(term: Term, cache: dict | None = None, budget: int = TABLE_BUDGET) -> np.ndarray:
    """Full row-major value table of ``term``."""
    cache = {} if cache is None else cache
    return _tab(term, cache, budget)


def _tab(term: Term, cache: dict, budget: int) -> np.ndarray:
    hit = cache.get(id(term))
    if hit is not None:
        return hit[0]
    d, n = term.domain_size, term.arity
    if d ** n > budget:
        raise BudgetExceeded("term table size", budget)
    if isinstance(term, Base):
        tab = term.op.table
    elif isinstance(term, Projection):
        tab = tuple_digits(d, n)[:, term.index]
    elif isinstance(term, Minor):
        inner = _tab(term.inner, cache, budget)
        tab = inner[_encode(tuple_digits(d, n)[:, list(term.sigma)], d)]
    elif isinstance(term, Composition):
        cols = np.stack([_tab(t, cache, budget) for t in term.inners], axis=1)
        tab = _tab(term.outer, cache, budget)[_encode(cols, d)]
    elif isinstance(term, Symmetrize):
        tab = _tab_symmetrize(term, _tab(term.inner, cache, budget))
    else:
        raise TypeError(f"unknown term node {type(term).__name__}")
    cache[id(term)] = (tab, term)
    return tab


def _tab_symmetrize(term: Symmetrize, inner: np.ndarray) -> np.ndarray:
    d, n = term.domain_size, term.arity
    digits = tuple_digits(d, n)
    counts = np.stack([(digits == v).sum(axis=1) for v in range(d)], axis=1)
    content = _encode(counts, n + 1)
    keys, cls = np.unique(content, return_inverse=True)
    cls = cls.ravel()
    sizes = np.bincount(cls)
    if sizes.max() > SYMMETRIZE_BUDGET:
        raise BudgetExceeded("distinct permuted tuples", SYMMETRIZE_BUDGET)
    hits = np.zeros((len(keys), d), dtype=np.int64)
    np.add.at(hits, (cls, inner), 1)
    first = np.zeros(len(keys), dtype=np.int64)
    first[cls[::-1]] = np.arange(len(cls))[::-1]
    values = np.empty(len(keys), dtype=np.int64)
    for c in range(len(keys)):
        mult = counts[first[c]]
        weight = math.prod(math.factorial(int(m)) for m in mult)
        values[c] = term.count(tuple(weight * int(h) for h in hits[c]))
    return values[cls]


def to_operation(term: Term, cache: dict | None = None) -> FiniteOperation:
    return FiniteOperation(term.domain_size, term.arity, tabulate(term, cache))


# generalized pairing ---------------------------------------------------------

def _gp_mask(d: int, n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows whose unique odd-multiplicity value occurs among the first k
    positions, and that value for every row."""
    digits = tuple_digits(d, n)
    counts = np.stack([(digits == v).sum(axis=1) for v in range(d)], axis=1)
    odd = counts % 2 == 1
    single = odd.sum(axis=1) == 1
    v = np.argmax(odd, axis=1)
    early = (digits[:, :k] == v[:, None]).any(axis=1)
    return single & early, v


def check_gp(term, n: int, k: int, cache: dict | None = None, budget: int = TABLE_BUDGET) -> bool:
    """Semantic GP(n, k): ``f(c) = f(v, ..., v)`` whenever ``v`` is the only
    value of odd multiplicity in ``c`` and occurs at a position ``<= k``."""
    term = _as_term(term)
    if n % 2 == 0 or not 1 <= k <= n or term.arity != n:
        raise ValueError("GP(n, k) needs an n-ary term, n odd, 1 <= k <= n")
    d = term.domain_size
    if d ** n > budget:
        raise BudgetExceeded("GP check tuples", budget)
    tab = tabulate(term, cache, budget)
    mask, v = _gp_mask(d, n, k)
    const = v * ((d ** n - 1) // (d - 1)) if d > 1 else v * 0
    return bool(np.array_equal(tab[mask], tab[const[mask]]))


def check_gp_literal(term, n: int, k: int) -> bool:
    """GP(n, k) by enumerating every identity pattern (feasible for small n)."""
    return op_satisfies(to_operation(_as_term(term)), make_condition("gp", n, k))


def _require(ok: bool, what: str):
    if not ok:
        raise ValueError(f"precondition failed: {what}")


def _satisfies(term: Term, kind: str, *params, cache=None) -> bool:
    return op_satisfies(to_operation(term, cache), make_condition(kind, *params))


def gp_lift_position(maj, gp, k: int, verify: bool = True, cache: dict | None = None) -> Term:
    """GP(n, k) witness -> GP(n, k+1) witness, using a quasi majority.

    The three copies of ``gp`` see the arguments at 1-based positions
    ``k-1, k, k+1`` as ``(k-1, k, k+1)``, ``(k-1, k+1, k)`` and ``(k, k+1, k-1)``.
    """
    maj, gp = _as_term(maj), _as_term(gp)
    n = gp.arity
    _require(n % 2 == 1 and 2 <= k < n, "n odd and 2 <= k < n")
    if verify:
        _require(_satisfies(maj, "majority", cache=cache), "quasi majority")
        _require(check_gp(gp, n, k, cache), f"GP({n},{k})")
    a, b, c = k - 2, k - 1, k        # 0-based positions k-1, k, k+1
    ident = list(range(n))
    second = list(ident)
    second[b], second[c] = c, b
    third = list(ident)
    third[a], third[b], third[c] = b, c, a
    return compose(maj, [minor(gp, ident, n), minor(gp, second, n), minor(gp, third, n)])


def gp_lift_arity(malt, p, verify: bool = True, cache: dict | None = None) -> Term:
    """GP(n, n) witness -> GP(n+2, 2) witness, using a quasi Maltsev operation:
    ``malt(p(c1,...,c1), p(c3,...,c_{n+2}), p(c2,...,c2))``."""
    malt, p = _as_term(malt), _as_term(p)
    n = p.arity
    _require(n >= 3 and n % 2 == 1, "n >= 3 odd")
    if verify:
        _require(_satisfies(malt, "maltsev", cache=cache), "quasi Maltsev")
        _require(check_gp(p, n, n, cache), f"GP({n},{n})")
    m = n + 2
    return compose(malt, [minor(p, [0] * n, m), minor(p, list(range(2, m)), m), minor(p, [1] * n, m)])


def maltsev_as_gp32(malt) -> Term:
    """``f(y1, y2, y3) = m(y1, y3, y2)``: a quasi Maltsev term read as GP(3, 2)."""
    malt = _as_term(malt)
    return minor(malt, [0, 2, 1], 3)


def build_gp(maj, malt, n: int, max_arity: int = MAX_GP_ARITY, verify: bool = True,
             cache: dict | None = None, trail: list | None = None) -> Term:
    """A GP(n, n) witness by alternately raising k and the arity.

    ``trail`` (if given) collects ``(n, term)`` for every GP(m, m) built on the way.
    """
    if n % 2 == 0 or n < 3:
        raise ValueError("n must be odd and at least 3")
    if n > max_arity:
        raise BudgetExceeded("generalized pairing arity", max_arity)
    cache = {} if cache is None else cache
    maj, malt = _as_term(maj), _as_term(malt)
    if verify:
        _require(_satisfies(maj, "majority", cache=cache), "quasi majority")
        _require(_satisfies(malt, "maltsev", cache=cache), "quasi Maltsev")
    cur = maltsev_as_gp32(malt)
    m, k = 3, 2
    while True:
        while k < m:
            cur = gp_lift_position(maj, cur, k, verify=False)
            k += 1
        if verify and not check_gp(cur, m, m, cache):
            raise VerificationError(f"GP({m},{m}) check failed")
        if trail is not None:
            trail.append((m, cur))
        if m == n:
            return cur
        cur = gp_lift_arity(malt, cur, verify=False)
        m, k = m + 2, 2


def symmetrize_gp(count: CountFunction, p, verify: bool = True, cache: dict | None = None) -> Term:
    """Fully symmetric GP(n, n) witness from any GP(n, n) witness."""
    p = _as_term(p)
    n = p.arity
    if verify:
        _require(check_gp(p, n, n, cache), f"GP({n},{n})")
    out = symmetrize(count, p)
    if verify:
        if not (check_gp(out, n, n, cache) and _satisfies(out, "fs", n, cache=cache)):
            raise VerificationError(f"SymGP({n}) check failed")
    return out


# generalized minorities and total symmetry ------------------------------------

def odd_subsets(m: int, proper: bool = False) -> list[tuple[int, ...]]:
    """Odd-size subsets of ``range(m)``, by size then lexicographically."""
    out = []
    for size in range(1, m + 1, 2):
        if proper and size == m:
            continue
        out.extend(itertools.combinations(range(m), size))
    return out


def build_compatible_gmins(sym_gps: Sequence, verify: bool = True,
                           cache: dict | None = None) -> list[Term]:
    """``[g1, g3, ..., g_{2K+1}]`` from symmetric GP witnesses of arities ``4^k - 1``."""
    sym_gps = [_as_term(p) for p in sym_gps]
    if not sym_gps:
        raise ValueError("need at least one symmetric GP witness")
    d = sym_gps[0].domain_size
    for k, p in enumerate(sym_gps, start=1):
        if p.arity != 4 ** k - 1:
            raise ValueError(f"entry {k} must have arity {4 ** k - 1}, got {p.arity}")
    gs: dict[int, Term] = {1: projection(d, 1, 0)}
    for k, p in enumerate(sym_gps, start=1):
        m = 2 * k + 1
        subsets = odd_subsets(m, proper=True)
        gs[m] = compose(p, [minor(gs[len(a)], a, m) for a in subsets])
    out = [gs[m] for m in sorted(gs)]
    if verify:
        n = 2 * len(sym_gps) + 1
        ops = {f"g{m}": to_operation(gs[m], cache) for m in gs}
        if not op_satisfies(ops, make_condition("compat_gmin", n)):
            raise VerificationError("compatible generalized minority check failed")
    return out


def build_ts(gmins: Sequence, count: CountFunction, verify: bool = True,
             cache: dict | None = None) -> Term:
    """Totally symmetric term of odd arity ``n``: ``count`` over the g-values of
    all odd-size subsets of the arguments."""
    gmins = [_as_term(g) for g in gmins]
    n = gmins[-1].arity
    if n % 2 == 0:
        raise ValueError("build_ts works at odd arity; use even_ts for even arities")
    if [g.arity for g in gmins] != list(range(1, n + 1, 2)):
        raise ValueError("gmins must be g1, g3, ..., gn")
    if count.family_size != 2 ** (n - 1):
        raise ValueError(f"count function must be sized for {2 ** (n - 1)} arguments")
    by_arity = {g.arity: g for g in gmins}
    outer = base(count.as_operation())
    ts = compose(outer, [minor(by_arity[len(a)], a, n) for a in odd_subsets(n)])
    if verify and not _satisfies(ts, "ts", n, cache=cache):
        raise VerificationError(f"TS({n}) check failed")
    return ts


def even_ts(ts_odd: Term) -> Term:
    """TS of arity n from TS of arity n+1 by repeating the last argument."""
    n = ts_odd.arity - 1
    return minor(ts_odd, list(range(n)) + [n - 1], n)


def boolean_fs_family(n: int) -> CountFunction:
    """Threshold rule on {0, 1}: 1 iff at least half of the family is 1."""
    if n < 1:
        raise ValueError("family size must be positive")
    return CountFunction(2, n, lambda c: 1 if 2 * c[1] >= n else 0, f"threshold/{n}")


BOOLEAN_MAJORITY = FiniteOperation(2, 3, [0, 0, 0, 1, 0, 1, 1, 1])
XOR3 = FiniteOperation(2, 3, [0, 1, 1, 0, 1, 0, 0, 1])


# pipeline ------------------------------------------------------------------------

@dataclass
class PipelineReport:
    domain: int
    n_max: int
    lines: list[tuple[str, bool, int]] = field(default_factory=list)
    terms: dict[str, Term] = field(default_factory=dict)

    def record(self, label: str, ok: bool, tuples: int):
        self.lines.append((label, ok, tuples))

    @property
    def failures(self) -> int:
        return sum(1 for _, ok, _ in self.lines if not ok)

    def text(self) -> str:
        out = [f"pipeline domain={self.domain} max={self.n_max}"]
        for label, ok, tuples in self.lines:
            out.append(f"[{'ok' if ok else 'FAIL'}] {label} ({tuples} tuples)")
        out.append(f"checks: {len(self.lines)}  failures: {self.failures}")
        return "\n".join(out) + "\n"


def _semantic_ts(tab: np.ndarray, d: int, n: int) -> bool:
    digits = tuple_digits(d, n)
    support = np.zeros(len(digits), dtype=np.int64)
    for v in range(d):
        support |= (digits == v).any(axis=1).astype(np.int64) << v
    for s in np.unique(support):
        if len(np.unique(tab[support == s])) != 1:
            return False
    return True


def pipeline(maj: FiniteOperation, malt: FiniteOperation, n_max: int = 5) -> PipelineReport:
    """Run the whole construction chain on a 2-element domain, checking every
    claimed condition exhaustively; raises ValueError on bad inputs."""
    d = maj.domain_size
    if d != 2 or malt.domain_size != 2:
        raise ValueError("the pipeline is implemented for a 2-element domain")
    if n_max % 2 == 0 or n_max < 3:
        raise ValueError("n_max must be odd and at least 3")
    K = (n_max - 1) // 2
    if 4 ** K - 1 > MAX_GP_ARITY:
        raise BudgetExceeded("symmetric GP arity", MAX_GP_ARITY)
    report = PipelineReport(d, n_max)
    cache: dict = {}
    _require(op_satisfies(maj, make_condition("majority")), "quasi majority input")
    _require(op_satisfies(malt, make_condition("maltsev")), "quasi Maltsev input")
    report.record("input: quasi majority", True, d ** 3)
    report.record("input: quasi Maltsev", True, d ** 3)
    gp32 = maltsev_as_gp32(malt)
    report.record("GP(3,2) from the Maltsev input", check_gp(gp32, 3, 2, cache), d ** 3)

    trail: list = []
    top = 4 ** K - 1
    build_gp(maj, malt, top, verify=False, cache=cache, trail=trail)
    gps = dict(trail)
    for m, term in trail:
        report.record(f"GP({m},{m})", check_gp(term, m, m, cache), d ** m)
        report.terms[f"GP{m}"] = term

    sym_gps = []
    for k in range(1, K + 1):
        m = 4 ** k - 1
        sym = symmetrize_gp(boolean_fs_family(math.factorial(m)), gps[m], verify=False)
        fs_ok = op_satisfies(to_operation(sym, cache), make_condition("fs", m))
        report.record(f"SymGP({m}): GP({m},{m}) and fully symmetric",
                      check_gp(sym, m, m, cache) and fs_ok, d ** m)
        report.terms[f"SymGP{m}"] = sym
        sym_gps.append(sym)

    gmins = build_compatible_gmins(sym_gps, verify=False)
    for g in gmins[1:]:
        m = g.arity
        report.terms[f"g{m}"] = g
        report.record(f"g{m} fully symmetric", _satisfies(g, "fs", m, cache=cache), d ** m)
    ops = {f"g{g.arity}": to_operation(g, cache) for g in gmins}
    g3 = ops["g3"]
    report.record("g3 equals ternary XOR", g3 == XOR3, d ** 3)
    for m in range(3, n_max + 1, 2):
        digits = tuple_digits(d, m)
        head = digits[:, 0] == digits[:, 1]
        lower = ops[f"g{m - 2}"].table[_encode(digits[:, 2:], d)]
        ok = bool(np.array_equal(ops[f"g{m}"].table[head], lower[head]))
        report.record(f"g{m}(y,y,x...) = g{m - 2}(x...)", ok, d ** m)
    report.record(f"compatible generalized minority up to {n_max}",
                  op_satisfies(ops, make_condition("compat_gmin", n_max)), d ** n_max)

    ts_odd = {}
    for m in range(3, n_max + 1, 2):
        ts_odd[m] = build_ts(gmins[: (m + 1) // 2], boolean_fs_family(2 ** (m - 1)), verify=False)
    for m in range(2, n_max + 1):
        ts = ts_odd[m] if m % 2 else even_ts(ts_odd[m + 1] if m + 1 in ts_odd else _extra_ts(gmins, m + 1))
        tab = tabulate(ts, cache)
        ok = op_satisfies(FiniteOperation(d, m, tab), make_condition("ts", m)) and _semantic_ts(tab, d, m)
        report.record(f"TS({m})", ok, d ** m)
        report.terms[f"ts{m}"] = ts
    return report


def _extra_ts(gmins, m):
    raise ValueError(f"TS({m - 1}) needs g{m}, which is beyond n_max")
