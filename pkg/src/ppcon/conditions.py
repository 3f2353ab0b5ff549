"""Minor conditions, finite operations, polymorphism search and the
fixed-point criterion for structures of group actions."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from ._csp import CSP
from .errors import BudgetExceeded
from .perm import FiniteGroup, GroupAction, prim_action
from .structures import RelStructure, connected_components, structure_of_action

__all__ = [
    "FiniteOperation", "MinorIdentity", "MinorCondition", "make_condition", "parse_condition",
    "op_satisfies", "is_polymorphism", "find_polymorphism", "action_criterion",
    "criterion_witness", "FsSpectrum", "fs_spectrum", "minority_polymorphism",
    "tuple_digits", "semigroup_members",
]

EVAL_BUDGET = 10**7
SEARCH_BUDGET = 10**8
ENUM_BUDGET = 10**8


@lru_cache(maxsize=64)
def tuple_digits(d: int, n: int) -> np.ndarray:
    """All ``d**n`` tuples in row-major order, as an ``(d**n, n)`` array."""
    if d ** n > 5 * 10**7:
        raise BudgetExceeded("tuple enumeration", 5 * 10**7)
    idx = np.arange(d ** n, dtype=np.int64)
    out = np.empty((d ** n, n), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        out[:, j] = idx % d
        idx //= d
    out.setflags(write=False)
    return out


def _encode(cols: np.ndarray, d: int) -> np.ndarray:
    """Row-major index of each row of ``cols`` (last axis = tuple positions)."""
    out = np.zeros(cols.shape[:-1], dtype=np.int64)
    for j in range(cols.shape[-1]):
        out = out * d + cols[..., j]
    return out


class FiniteOperation:
    """An operation on ``range(domain_size)`` stored as a row-major value table."""

    def __init__(self, domain_size: int, arity: int, table):
        tab = np.asarray(table, dtype=np.int64).copy()
        if tab.shape != (domain_size ** arity,):
            raise ValueError(f"table must have {domain_size ** arity} entries")
        if tab.size and (tab.min() < 0 or tab.max() >= domain_size):
            raise ValueError("table value outside the domain")
        tab.setflags(write=False)
        self.domain_size = domain_size
        self.arity = arity
        self.table = tab

    @classmethod
    def from_function(cls, domain_size: int, arity: int, fn) -> "FiniteOperation":
        rows = tuple_digits(domain_size, arity)
        return cls(domain_size, arity, [fn(*map(int, r)) for r in rows])

    @classmethod
    def projection(cls, domain_size: int, arity: int, index: int) -> "FiniteOperation":
        return cls(domain_size, arity, tuple_digits(domain_size, arity)[:, index])

    def __call__(self, *args: int) -> int:
        if len(args) != self.arity:
            raise ValueError("wrong number of arguments")
        i = 0
        for a in args:
            i = i * self.domain_size + a
        return int(self.table[i])

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteOperation) and self.domain_size == other.domain_size \
            and self.arity == other.arity and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.domain_size, self.arity, self.table.tobytes()))

    def __repr__(self) -> str:
        return f"<FiniteOperation d={self.domain_size} arity={self.arity}>"


@dataclass(frozen=True)
class MinorIdentity:
    """``left_symbol(x_left...) = right_symbol(x_right...)`` over ``variable_count`` variables."""

    variable_count: int
    left: tuple[str, tuple[int, ...]]
    right: tuple[str, tuple[int, ...]]

    def __post_init__(self):
        for _, args in (self.left, self.right):
            if any(not 0 <= a < self.variable_count for a in args):
                raise ValueError("variable index out of range")

    def __str__(self) -> str:
        names = "xyzuvw" if self.variable_count <= 6 else None

        def var(i):
            return names[i] if names else f"x{i + 1}"

        fmt = lambda t: f"{t[0]}({','.join(var(a) for a in t[1])})"
        return f"{fmt(self.left)} = {fmt(self.right)}"


@dataclass(frozen=True)
class MinorCondition:
    symbols: Mapping[str, int]
    identities: tuple[MinorIdentity, ...]
    kind: str = "custom"
    params: tuple = ()
    label: str = ""

    def __post_init__(self):
        for ident in self.identities:
            for sym, args in (ident.left, ident.right):
                if self.symbols.get(sym) != len(args):
                    raise ValueError(f"symbol {sym!r} used with wrong arity")

    def __str__(self) -> str:
        return self.label or self.kind


def _ident(vc, lsym, largs, rsym, rargs) -> MinorIdentity:
    return MinorIdentity(vc, (lsym, tuple(largs)), (rsym, tuple(rargs)))


def _fs_identities(sym: str, n: int) -> list[MinorIdentity]:
    out = []
    for i in range(n - 1):
        right = list(range(n))
        right[i], right[i + 1] = right[i + 1], right[i]
        out.append(_ident(n, sym, range(n), sym, right))
    return out


def _perfect_matchings(items: list[int]):
    if not items:
        yield []
        return
    first = items[0]
    for j in range(1, len(items)):
        rest = items[1:j] + items[j + 1:]
        for m in _perfect_matchings(rest):
            yield [(first, items[j])] + m


def _gp_identities(sym: str, n: int, k: int, cap: int = 10**5) -> list[MinorIdentity]:
    count = k * math.prod(range(n - 2, 0, -2))
    if count > cap:
        raise BudgetExceeded("literal generalized pairing identities", cap)
    vc = (n + 1) // 2
    out = []
    for i in range(k):
        others = [p for p in range(n) if p != i]
        for matching in _perfect_matchings(others):
            args = [0] * n
            for v, (a, b) in enumerate(matching, start=1):
                args[a] = args[b] = v
            out.append(_ident(vc, sym, [0] * n, sym, args))
    return out


def make_condition(kind: str, *params) -> MinorCondition:
    """Kind-tagged conditions with reduced identity sets.

    Kinds: ``maltsev``, ``majority``, ``cyclic`` (p), ``fs`` (n), ``ts`` (n),
    ``gmin`` (n odd), ``gp`` (n odd, k), ``symgp`` (n odd), ``compat_gmin``
    (n odd, symbols ``g1, g3, ...``), ``action`` (a GroupAction).
    """
    f = "f"
    if kind == "maltsev":
        ids = [_ident(2, f, (0, 0, 0), f, (0, 1, 1)), _ident(2, f, (0, 1, 1), f, (1, 1, 0))]
        return MinorCondition({f: 3}, tuple(ids), kind, (), "quasi Maltsev")
    if kind == "majority":
        ids = [_ident(2, f, (0, 0, 0), f, (0, 0, 1)), _ident(2, f, (0, 0, 1), f, (0, 1, 0)),
               _ident(2, f, (0, 1, 0), f, (1, 0, 0))]
        return MinorCondition({f: 3}, tuple(ids), kind, (), "quasi majority")
    if kind == "cyclic":
        (p,) = params
        if p < 1:
            raise ValueError("cyclic arity must be positive")
        ids = [_ident(p, f, range(p), f, [(i + 1) % p for i in range(p)])]
        return MinorCondition({f: p}, tuple(ids), kind, (p,), f"{p}-cyclic")
    if kind == "fs":
        (n,) = params
        if n < 1:
            raise ValueError("arity must be positive")
        return MinorCondition({f: n}, tuple(_fs_identities(f, n)), kind, (n,), f"fully symmetric {n}-ary")
    if kind == "ts":
        (n,) = params
        if n < 1:
            raise ValueError("arity must be positive")
        ids = _fs_identities(f, n)
        if n >= 3:
            # f(x,x,y,...) = f(x,y,y,...) moves one copy between two present values
            rest = list(range(2, n - 1))
            ids.append(_ident(n - 1, f, [0, 0, 1] + rest, f, [0, 1, 1] + rest))
        return MinorCondition({f: n}, tuple(ids), kind, (n,), f"totally symmetric {n}-ary")
    if kind == "gmin":
        (n,) = params
        if n < 3 or n % 2 == 0:
            raise ValueError("generalized minority needs odd n >= 3")
        head = list(range(n - 2))
        ids = _fs_identities(f, n) + [_ident(n, f, head + [n - 2, n - 2], f, head + [n - 1, n - 1])]
        return MinorCondition({f: n}, tuple(ids), kind, (n,), f"generalized minority {n}-ary")
    if kind == "gp":
        n, k = params
        if n % 2 == 0 or not 1 <= k <= n:
            raise ValueError("generalized pairing needs odd n and 1 <= k <= n")
        return MinorCondition({f: n}, tuple(_gp_identities(f, n, k)), kind, (n, k), f"GP({n},{k})")
    if kind == "symgp":
        (n,) = params
        if n % 2 == 0:
            raise ValueError("SymGP needs odd n")
        ids = _fs_identities(f, n) + _gp_identities(f, n, n)
        return MinorCondition({f: n}, tuple(ids), kind, (n,), f"SymGP({n})")
    if kind == "compat_gmin":
        (n,) = params
        if n < 1 or n % 2 == 0:
            raise ValueError("compatible generalized minority needs odd n")
        syms = {f"g{m}": m for m in range(1, n + 1, 2)}
        ids = []
        for m in range(1, n + 1, 2):
            ids += _fs_identities(f"g{m}", m)
            if m + 2 <= n:
                ids.append(_ident(m + 1, f"g{m + 2}", [m, m] + list(range(m)), f"g{m}", range(m)))
        return MinorCondition(syms, tuple(ids), kind, (n,), f"compatible generalized minority up to {n}")
    if kind == "action":
        (act,) = params
        k = act.points
        ids = [_ident(k, f, range(k), f, [int(x) for x in img]) for img in act.generator_arrays]
        label = f"Sigma({act.group.name or 'H'} on {k} points)"
        return MinorCondition({f: k}, tuple(ids), kind, (act,), label)
    raise ValueError(f"unknown condition kind {kind!r}")


def parse_condition(literal: str) -> MinorCondition:
    """CLI literals: ``maltsev``, ``majority``, ``cyclic:p``, ``fs:n``, ``ts:n``,
    ``gmin:n``, ``gp:n:k``, ``symgp:n``, ``compat:n``, ``action:<action spec>``."""
    head, _, rest = literal.strip().partition(":")
    head = head.lower()
    if head in ("maltsev", "majority"):
        return make_condition(head)
    if head == "action":
        from . import catalog
        return make_condition("action", catalog.action(rest))
    nums = [int(x) for x in rest.split(":")] if rest else []
    kinds = {"cyclic": "cyclic", "fs": "fs", "ts": "ts", "gmin": "gmin", "gp": "gp",
             "symgp": "symgp", "compat": "compat_gmin", "compat_gmin": "compat_gmin"}
    if head not in kinds:
        raise ValueError(f"unknown condition literal {literal!r}")
    return make_condition(kinds[head], *nums)


def op_satisfies(ops, condition: MinorCondition, budget: int = EVAL_BUDGET) -> bool:
    """Whether the operations satisfy every identity under every assignment."""
    if isinstance(ops, FiniteOperation):
        (sym,) = condition.symbols
        ops = {sym: ops}
    d = {op.domain_size for op in ops.values()}
    if len(d) != 1:
        raise ValueError("operations must share a domain")
    d = d.pop()
    for sym, ar in condition.symbols.items():
        if ops[sym].arity != ar:
            raise ValueError(f"operation for {sym!r} has the wrong arity")
    for ident in condition.identities:
        if d ** ident.variable_count > budget:
            raise BudgetExceeded("identity assignments", budget)
        assign = tuple_digits(d, ident.variable_count)
        (ls, la), (rs, ra) = ident.left, ident.right
        lv = ops[ls].table[_encode(assign[:, list(la)], d)]
        rv = ops[rs].table[_encode(assign[:, list(ra)], d)]
        if not np.array_equal(lv, rv):
            return False
    return True


def is_polymorphism(op: FiniteOperation, structure: RelStructure, budget: int = 10**7) -> bool:
    if op.domain_size != structure.domain_size:
        raise ValueError("domain mismatch")
    n = op.arity
    for _, (arity, ts) in structure.relations.items():
        if not ts:
            continue
        rel = np.array(ts, dtype=np.int64)
        if len(rel) ** n > budget:
            raise BudgetExceeded("polymorphism check", budget)
        allowed = set(_encode(rel, op.domain_size).tolist())
        combos = tuple_digits(len(rel), n)
        # cols[c, j] is the j-th column of the c-th choice of n tuples
        cols = np.stack([_encode(rel[combos][:, :, j], op.domain_size) for j in range(arity)], axis=1)
        image = op.table[cols]
        if not np.isin(_encode(image, op.domain_size), list(allowed)).all():
            return False
    return True


def find_polymorphism(structure: RelStructure, condition: MinorCondition,
                      budget: int = SEARCH_BUDGET) -> dict[str, FiniteOperation] | None:
    """Polymorphisms satisfying the condition, or None when provably absent.

    Table cells forced equal by the identities are merged first; classes are
    then filled in order of their least cell, values ascending.
    """
    d = structure.domain_size
    syms = list(condition.symbols)
    offsets, total = {}, 0
    for s in syms:
        offsets[s] = total
        total += d ** condition.symbols[s]
    if total > 10**7:
        raise BudgetExceeded("polymorphism table cells", 10**7)

    src, dst = [], []
    for ident in condition.identities:
        if d ** ident.variable_count > budget:
            raise BudgetExceeded("identity assignments", budget)
        assign = tuple_digits(d, ident.variable_count)
        (ls, la), (rs, ra) = ident.left, ident.right
        src.append(offsets[ls] + _encode(assign[:, list(la)], d))
        dst.append(offsets[rs] + _encode(assign[:, list(ra)], d))
    if src:
        src, dst = np.concatenate(src), np.concatenate(dst)
    else:
        src = dst = np.zeros(0, dtype=np.int64)
    graph = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(total, total))
    _, raw = _cc(graph, directed=False)
    first = np.full(raw.max() + 1, total, dtype=np.int64)
    np.minimum.at(first, raw, np.arange(total))
    rank = np.argsort(np.argsort(first))
    label = rank[raw]
    n_classes = int(label.max()) + 1

    csp = CSP(n_classes, d)
    for s in syms:
        a = condition.symbols[s]
        for _, (arity, ts) in structure.relations.items():
            if not ts:
                continue
            rel = np.array(ts, dtype=np.int64)
            if len(rel) ** a > budget:
                raise BudgetExceeded("polymorphism constraints", budget)
            combos = tuple_digits(len(rel), a)
            chosen = rel[combos]                       # (choices, a, arity)
            cells = offsets[s] + np.stack([_encode(chosen[:, :, j], d) for j in range(arity)], axis=1)
            rid = csp.relation(ts)
            for row in np.unique(label[cells], axis=0):
                csp.add(tuple(int(x) for x in row), rid)
    sol = csp.solve(order="lex", budget=budget)
    if sol is None:
        return None
    values = np.array(sol, dtype=np.int64)[label]
    out = {}
    for s in syms:
        a = condition.symbols[s]
        out[s] = FiniteOperation(d, a, values[offsets[s]:offsets[s] + d ** a])
    return out


# fixed-point criterion ------------------------------------------------------

def _stab_masks_raw(gact: GroupAction, hact: GroupAction, budget: int, chunk: int = 1 << 17):
    m, k = gact.points, hact.points
    total = m ** k
    if total > budget:
        raise BudgetExceeded("maps X^Y", budget)
    G = gact.element_images
    H = hact.element_images
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        t = np.empty((idx.size, k), dtype=np.int64)
        rem = idx.copy()
        for j in range(k - 1, -1, -1):
            t[:, j] = rem % m
            rem //= m
        orbit = np.stack([_encode(t[:, h], m) for h in H], axis=1)   # indices of t_h
        mask = np.empty((idx.size, len(G)), dtype=bool)
        for g, gi in enumerate(G):
            gt = _encode(gi[t], m)
            mask[:, g] = (orbit == gt[:, None]).any(axis=1)
        yield t, mask


def _stab_masks_orbits(gact: GroupAction, hact: GroupAction, budget: int, batch: int = 512):
    """One map per G x H orbit on X^Y; the stabilizer of ``H(t)`` is read off
    the orbit itself (``g.t`` lies in ``H(t)``)."""
    m, k = gact.points, hact.points
    total = m ** k
    if total > budget:
        raise BudgetExceeded("maps X^Y", budget)
    G = gact.element_images
    H = hact.element_images
    visited = np.zeros(total, dtype=bool)
    weights = m ** np.arange(k - 1, -1, -1, dtype=np.int64)
    pos = 0
    reps, masks = [], []
    while True:
        while pos < total and visited[pos]:
            nxt = np.flatnonzero(~visited[pos:pos + 65536])
            pos = pos + int(nxt[0]) if nxt.size else pos + 65536
        if pos >= total:
            break
        t = (pos // weights) % m
        th = t[H]                           # (|H|, k): t_h
        gth = G[:, th]                      # (|G|, |H|, k): g.t_h
        codes = gth @ weights
        visited[codes.ravel()] = True
        masks.append(np.isin(codes[:, 0], codes[0, :]))
        reps.append(t)
        if len(reps) >= batch:
            yield np.array(reps), np.array(masks)
            reps, masks = [], []
    if reps:
        yield np.array(reps), np.array(masks)


def _identity_like(gact: GroupAction, hact: GroupAction):
    """Candidate witnesses when X^Y is too large to enumerate."""
    if gact.points == hact.points:
        yield np.arange(gact.points)


def _stab_masks_candidates(gact: GroupAction, hact: GroupAction, candidates):
    G = gact.element_images
    H = hact.element_images
    m = gact.points
    weights = m ** np.arange(hact.points - 1, -1, -1, dtype=np.int64)
    for t in candidates:
        t = np.asarray(t, dtype=np.int64)
        codes = G[:, t[H]] @ weights
        yield t[None, :], np.isin(codes[:, 0], codes[0, :])[None, :]


def _multisets(m: int, k: int, budget: int) -> np.ndarray:
    count = math.comb(m + k - 1, k)
    if count > budget:
        raise BudgetExceeded("multisets", budget)
    out = np.zeros((count, m), dtype=np.int16)
    for row, combo in enumerate(itertools.combinations_with_replacement(range(m), k)):
        for x in combo:
            out[row, x] += 1
    return out


def _stab_masks_multiset(gact: GroupAction, k: int, budget: int, chunk: int = 1 << 16):
    counts = _multisets(gact.points, k, budget)
    G = gact.element_images
    for start in range(0, len(counts), chunk):
        c = counts[start:start + chunk]
        mask = np.empty((len(c), len(G)), dtype=bool)
        for g, gi in enumerate(G):
            # counts of g.t are c o g^-1; equal to c iff c[g(x)] == c[x]
            mask[:, g] = (c[:, gi] == c).all(axis=1)
        yield c, mask


def _is_full_symmetric(hact: GroupAction) -> bool:
    k = hact.points
    if hact.group.order != math.factorial(k):
        return False
    imgs = hact.element_images
    return len({r.tobytes() for r in imgs}) == math.factorial(k)


def criterion_witness(gact: GroupAction, hact: GroupAction, budget: int = ENUM_BUDGET):
    """A map ``t`` whose orbit stabilizer has no fixed point, or None if none exists.

    When ``X^Y`` exceeds the budget, a few structured candidates (the identity
    map when ``|X| = |Y|``) are tried first; a witness found that way is a
    proof, otherwise ``BudgetExceeded`` is raised.
    """
    G = gact.element_images
    fixed = G == np.arange(gact.points)
    multiset = _is_full_symmetric(hact)
    total = gact.points ** hact.points
    if multiset:
        chunks = _stab_masks_multiset(gact, hact.points, budget)
    elif total > budget:
        chunks = _stab_masks_candidates(gact, hact, _identity_like(gact, hact))
    elif total // (len(G) * hact.group.order) <= 200_000:
        chunks = _stab_masks_orbits(gact, hact, budget)
    else:
        chunks = _stab_masks_raw(gact, hact, budget)
    checked: dict[bytes, bool] = {}
    for t, mask in chunks:
        packed = np.packbits(mask, axis=1)
        uniq, first = np.unique(packed, axis=0, return_index=True)
        for row, pos in zip(uniq, first):
            key = row.tobytes()
            ok = checked.get(key)
            if ok is None:
                ok = bool(fixed[mask[pos]].all(axis=0).any())
                checked[key] = ok
            if not ok:
                row = t[pos]
                if multiset:
                    row = np.repeat(np.arange(gact.points), row)
                return tuple(int(x) for x in row)
    if not multiset and total > budget:
        raise BudgetExceeded("maps X^Y", budget)
    return None


def action_criterion(gact: GroupAction, hact: GroupAction, budget: int = ENUM_BUDGET) -> bool:
    """Whether Pol(S(G on X)) satisfies Sigma(H on Y).

    Holds iff for every ``t: Y -> X`` the setwise stabilizer in ``G`` of the
    orbit ``H(t)`` fixes a point of ``X``.  When ``H`` is the full symmetric
    group on ``Y`` the maps are enumerated as multisets.
    """
    return criterion_witness(gact, hact, budget) is None


# FS spectra -------------------------------------------------------------------

def semigroup_members(generators: Sequence[int], upto: int) -> list[bool]:
    """``members[k]``: k is a nonnegative integer combination of the generators."""
    ok = [False] * (upto + 1)
    ok[0] = True
    for k in range(1, upto + 1):
        ok[k] = any(k >= s and ok[k - s] for s in generators)
    return ok


@dataclass(frozen=True)
class FsSpectrum:
    component_sizes: tuple[int, ...]
    upto: int
    failing: tuple[int, ...]
    smallest_failing: int
    largest_maximal_index: int
    eventually_all: int | None = field(default=None)  # every k >= this fails

    def describe(self) -> str:
        if self.eventually_all is None:
            listed = [k for k in self.failing]
            return "{" + ",".join(map(str, listed)) + "} (multiples only; no eventual tail)"
        head = [k for k in self.failing if k < self.eventually_all]
        return "{" + ",".join(map(str, head)) + "} ∪ {k >= " + str(self.eventually_all) + "}"


def fs_spectrum(group: FiniteGroup, upto: int = 25) -> FsSpectrum:
    """Arities k <= upto where fully symmetric polymorphisms of S(G on prim(G)) fail.

    These are exactly the sums of component sizes (with repetition).
    """
    if group.order < 2:
        raise ValueError("the trivial group has no prim action")
    act = prim_action(group)
    sizes = tuple(len(c) for c in connected_components(structure_of_action(act)))
    small, big = min(sizes), max(sizes)
    horizon = max(upto, small * big + small)
    members = semigroup_members(sizes, horizon)
    failing = tuple(k for k in range(1, upto + 1) if members[k])
    tail = None
    if math.gcd(*sizes) == 1:
        last_gap = max(k for k in range(horizon + 1) if not members[k])
        tail = last_gap + 1
    return FsSpectrum(sizes, upto, failing, small, big, tail)


def minority_polymorphism(action: GroupAction) -> FiniteOperation:
    """Ternary minority on the points: the odd one out, the first argument when
    all differ, the common value when all agree."""
    m = action.points
    xyz = tuple_digits(m, 3)
    x, y, z = xyz[:, 0], xyz[:, 1], xyz[:, 2]
    table = np.where(x == y, z, np.where(x == z, y, np.where(y == z, x, x)))
    return FiniteOperation(m, 3, table)
