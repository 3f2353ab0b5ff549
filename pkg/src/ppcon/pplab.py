"""Primitive positive formulas, pp-powers, indicator structures, and the
reduction of a fixed-point-free action to a simple group.

Text format for formulas::

    R(x1,x3) & y2=x1 & exists z1: E(z1,x2)

``x<i>`` and ``y<i>`` are free (all x's first, then all y's), ``z<i>`` are
existential, ``bottom(x1,...)`` is the always-false atom.  An ``exists`` prefix
may appear before any conjunct; since variable names are global the scope
does not matter.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .conditions import _encode, tuple_digits
from .errors import BudgetExceeded
from .perm import (LATTICE_CAP, FiniteGroup, GroupAction, Permutation, normal_subgroups,
                   prim_action, restrict_action, subgroups_up_to_conjugacy)
from .structures import RelStructure, generator_names

__all__ = [
    "Atom", "PPFormula", "PPPowerSpec", "parse_pp", "eval_pp", "pp_power", "chain_formula",
    "polymorphism_tables", "sn_indicator", "prim_indicator", "has_fixed_point",
    "ReduceStep", "ReduceResult", "reduce_to_simple",
]

JOIN_BUDGET = 10**6
POWER_BUDGET = 10**6
TABLE_BUDGET = 10**6


@dataclass(frozen=True)
class Atom:
    """``kind`` is "rel", "eq" or "bottom"; ``name`` is only used by "rel"."""
    kind: str
    variables: tuple[int, ...]
    name: str | None = None

    @classmethod
    def rel(cls, name: str, *variables: int) -> "Atom":
        return cls("rel", tuple(variables), name)

    @classmethod
    def eq(cls, v: int, w: int) -> "Atom":
        return cls("eq", (v, w))

    @classmethod
    def bottom(cls, *variables: int) -> "Atom":
        return cls("bottom", tuple(variables))


@dataclass(frozen=True)
class PPFormula:
    free: int
    existential: int
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        total = self.free + self.existential
        for a in self.atoms:
            if a.kind not in ("rel", "eq", "bottom"):
                raise ValueError(f"unknown atom kind {a.kind!r}")
            if a.kind == "eq" and len(a.variables) != 2:
                raise ValueError("equality atoms take two variables")
            if any(not 0 <= v < total for v in a.variables):
                raise ValueError("atom variable out of range")


_ATOM_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)$")
_VAR_RE = re.compile(r"^([xyz])(\d+)$")


def parse_pp(text: str, free: int | None = None) -> PPFormula:
    """Parse the text format; ``free`` overrides the number of x-variables
    (useful when the highest x never occurs)."""
    conjuncts = [c.strip() for c in text.split("&")]
    raw_atoms = []
    names: set[tuple[str, int]] = set()

    def var(tok):
        m = _VAR_RE.match(tok.strip())
        if not m or int(m.group(2)) < 1:
            raise ValueError(f"bad variable {tok!r}")
        key = (m.group(1), int(m.group(2)))
        names.add(key)
        return key

    for c in conjuncts:
        while c.startswith("exists"):
            head, sep, rest = c.partition(":")
            if not sep:
                raise ValueError(f"missing ':' after exists in {c!r}")
            for tok in head[len("exists"):].split(","):
                if tok.strip():
                    if not tok.strip().startswith("z"):
                        raise ValueError("only z-variables can be quantified")
                    var(tok)
            c = rest.strip()
        if not c:
            raise ValueError("empty conjunct")
        if "=" in c and "(" not in c:
            left, right = c.split("=", 1)
            raw_atoms.append(("eq", None, (var(left), var(right))))
            continue
        m = _ATOM_RE.match(c)
        if not m:
            raise ValueError(f"cannot parse conjunct {c!r}")
        args = tuple(var(t) for t in m.group(2).split(",")) if m.group(2).strip() else ()
        if m.group(1) == "bottom":
            raw_atoms.append(("bottom", None, args))
        else:
            raw_atoms.append(("rel", m.group(1), args))
    nx = max([i for k, i in names if k == "x"], default=0)
    if free is not None:
        if free < nx:
            raise ValueError("free count below the largest x index")
        nx = free
    ny = max([i for k, i in names if k == "y"], default=0)
    nz = max([i for k, i in names if k == "z"], default=0)
    offset = {"x": 0, "y": nx, "z": nx + ny}
    atoms = tuple(Atom(kind, tuple(offset[k] + i - 1 for k, i in args), name)
                  for kind, name, args in raw_atoms)
    return PPFormula(nx + ny, nz, atoms)


def chain_formula(word: Sequence[tuple[str, int]]) -> PPFormula:
    """``exists z: R1(x, z1) & R2(z1, z2) & ... (x1 ... x2)`` for a relation word;
    ``-1`` letters use the converse."""
    n = len(word)
    if n == 0:
        return PPFormula(2, 0, (Atom.eq(0, 1),))
    chain = [0] + list(range(2, n + 1)) + [1]
    atoms = []
    for (name, direction), a, b in zip(word, chain, chain[1:]):
        atoms.append(Atom.rel(name, a, b) if direction == 1 else Atom.rel(name, b, a))
    return PPFormula(2, n - 1, tuple(atoms))


# evaluation --------------------------------------------------------------------

def _atom_table(base: RelStructure, atom: Atom) -> tuple[tuple[int, ...], set[tuple[int, ...]]]:
    cols = tuple(dict.fromkeys(atom.variables))
    if atom.kind == "eq":
        v, w = atom.variables
        if v == w:
            return (v,), {(a,) for a in range(base.domain_size)}
        return (v, w), {(a, a) for a in range(base.domain_size)}
    if atom.name not in base.relations:
        raise ValueError(f"unknown relation {atom.name!r}")
    if base.arity(atom.name) != len(atom.variables):
        raise ValueError(f"relation {atom.name!r} has arity {base.arity(atom.name)}")
    rows = set()
    for t in base.tuples(atom.name):
        assign = {}
        if all(assign.setdefault(v, x) == x for v, x in zip(atom.variables, t)):
            rows.add(tuple(assign[c] for c in cols))
    return cols, rows


def _join(a, b, budget: int):
    (ca, ra), (cb, rb) = a, b
    shared = [c for c in ca if c in cb]
    ia = [ca.index(c) for c in shared]
    ib = [cb.index(c) for c in shared]
    extra = [i for i, c in enumerate(cb) if c not in ca]
    cols = ca + tuple(cb[i] for i in extra)
    index: dict[tuple, list] = {}
    for t in rb:
        index.setdefault(tuple(t[i] for i in ib), []).append(tuple(t[i] for i in extra))
    out = set()
    for t in ra:
        for tail in index.get(tuple(t[i] for i in ia), ()):
            out.add(t + tail)
            if len(out) > budget:
                raise BudgetExceeded("pp join size", budget)
    return cols, out


def _project(table, keep):
    cols, rows = table
    idx = [i for i, c in enumerate(cols) if c in keep]
    return tuple(cols[i] for i in idx), {tuple(r[i] for i in idx) for r in rows}


def eval_pp(base: RelStructure, formula: PPFormula, budget: int = JOIN_BUDGET) -> frozenset[tuple[int, ...]]:
    """Free-variable assignments that extend to a satisfying assignment.

    Joins greedily, taking the atom with the smallest estimated next result
    (connected atoms first), and projects away existential variables as soon
    as no pending atom mentions them.
    """
    if any(a.kind == "bottom" for a in formula.atoms):
        return frozenset()
    d, nf = base.domain_size, formula.free
    pending = [_atom_table(base, a) for a in formula.atoms]
    if any(not rows for _, rows in pending):
        return frozenset()
    cur = ((), {()})
    while pending:
        cur_vars = set(cur[0])
        best, best_key = 0, None
        for i, (cols, rows) in enumerate(pending):
            shared = len(cur_vars & set(cols))
            # estimated join size, treating columns as independent and uniform
            est = len(cur[1]) * len(rows) / d ** shared
            key = (bool(cur_vars) and not shared, est, i)
            if best_key is None or key < best_key:
                best, best_key = i, key
        cur = _join(cur, pending.pop(best), budget)
        if not cur[1]:
            return frozenset()
        needed = set(range(nf)) | {v for cols, _ in pending for v in cols}
        cur = _project(cur, needed)
    cols, rows = cur
    missing = [v for v in range(nf) if v not in cols]
    if d ** len(missing) * len(rows) > budget:
        raise BudgetExceeded("pp result size", budget)
    out = set()
    for r in rows:
        assign = dict(zip(cols, r))
        for fill in itertools.product(range(d), repeat=len(missing)):
            assign.update(zip(missing, fill))
            out.add(tuple(assign[v] for v in range(nf)))
    return frozenset(out)


@dataclass(frozen=True)
class PPPowerSpec:
    base: RelStructure
    dimension: int
    relations: Mapping[str, tuple[int, PPFormula]]

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        for name, (k, phi) in self.relations.items():
            if phi.free != k * self.dimension:
                raise ValueError(f"{name!r}: a {k}-ary relation needs {k * self.dimension} free variables")


def pp_power(spec: PPPowerSpec, budget: int = POWER_BUDGET) -> RelStructure:
    """Structure on ``base^n`` (n-tuples numbered in row-major order)."""
    d, n = spec.base.domain_size, spec.dimension
    if d ** n > budget:
        raise BudgetExceeded("pp-power domain", budget)
    rels = {}
    for name, (k, phi) in spec.relations.items():
        rows = eval_pp(spec.base, phi, budget)
        if rows:
            arr = np.array(sorted(rows), dtype=np.int64).reshape(len(rows), k, n)
            pts = _encode(arr.reshape(-1, n), d).reshape(len(rows), k)
            rels[name] = (k, [tuple(int(x) for x in r) for r in pts])
        else:
            rels[name] = (k, [])
    return RelStructure(d ** n, rels)


# indicator structures ------------------------------------------------------------

def polymorphism_tables(base: RelStructure, n: int, budget: int = TABLE_BUDGET) -> np.ndarray:
    """All n-ary polymorphism tables of ``base``, rows in lexicographic order."""
    d = base.domain_size
    cells = d ** n
    if cells > 64 or d ** cells > budget:
        raise BudgetExceeded("operation tables", budget)
    tables = tuple_digits(d, cells)
    keep = np.ones(len(tables), dtype=bool)
    for _, (arity, ts) in base.relations.items():
        if not ts:
            continue
        rel = np.array(ts, dtype=np.int64)
        combos = tuple_digits(len(rel), n)
        chosen = rel[combos]
        cols = np.stack([_encode(chosen[:, :, j], d) for j in range(arity)], axis=1)
        allowed = _encode(rel, d)
        for row in np.unique(cols, axis=0):
            keep &= np.isin(_encode(tables[:, row], d), allowed)
    return tables[keep]


def _minor_index(tables: np.ndarray, d: int, n: int, sigma: Sequence[int]) -> np.ndarray:
    """Index (into ``tables``) of ``f(x[sigma[0]], ..., x[sigma[n-1]])`` for each row."""
    digits = tuple_digits(d, n)
    src = _encode(digits[:, list(sigma)], d)
    codes = _encode(tables, d)
    moved = _encode(tables[:, src], d)
    order = np.argsort(codes)
    pos = np.searchsorted(codes[order], moved)
    if np.any(pos >= len(codes)) or np.any(codes[order][np.minimum(pos, len(codes) - 1)] != moved):
        raise ValueError("minor of a polymorphism left the table set")
    return order[pos]


def sn_indicator(base: RelStructure, n: int, budget: int = TABLE_BUDGET) -> RelStructure:
    """Structure on the n-ary polymorphisms, one relation ``s<i>`` per adjacent
    transposition (i, i+1), tuples ``(f, f_sigma)``."""
    d = base.domain_size
    tables = polymorphism_tables(base, n, budget)
    rels = {}
    for i in range(n - 1):
        sigma = list(range(n))
        sigma[i], sigma[i + 1] = i + 1, i
        img = _minor_index(tables, d, n, sigma)
        rels[f"s{i + 1}"] = (2, [(f, int(g)) for f, g in enumerate(img)])
    out = RelStructure(len(tables), rels)
    out.tables = tables
    return out


def prim_indicator(base: RelStructure, group: FiniteGroup, budget: int = TABLE_BUDGET,
                   cap: int = LATTICE_CAP) -> RelStructure:
    """Structure on the |prim(G)|-ary polymorphisms, one relation per generator g
    of G with tuples ``(f, f_g)``, ``f_g(x) = f(x_{g(1)}, ..., x_{g(m)})``."""
    act = prim_action(group, cap)
    d, m = base.domain_size, act.points
    tables = polymorphism_tables(base, m, budget)
    names = generator_names(len(act.generator_images))
    rels = {}
    for name, img in zip(names, act.generator_arrays):
        idx = _minor_index(tables, d, m, [int(x) for x in img])
        rels[name] = (2, [(f, int(g)) for f, g in enumerate(idx)])
    out = RelStructure(len(tables), rels)
    out.tables = tables
    return out


def has_fixed_point(structure: RelStructure) -> bool:
    """Some point carries a loop in every relation."""
    n = structure.domain_size
    ok = np.ones(n, dtype=bool)
    for name, (arity, ts) in structure.relations.items():
        if arity != 2:
            raise ValueError("binary relations expected")
        loop = np.zeros(n, dtype=bool)
        for a, b in ts:
            if a == b:
                loop[a] = True
        ok &= loop
    return bool(ok.any())


# reduce to a simple group -----------------------------------------------------------

@dataclass(frozen=True)
class ReduceStep:
    kind: str            # "minimal-subgroup", "quotient" or "simple"
    group_order: int
    points: int
    detail: str


@dataclass
class ReduceResult:
    verdict: str         # "fixed-point" or "simple-group"
    group: FiniteGroup | None
    action: GroupAction | None
    steps: list[ReduceStep] = field(default_factory=list)

    def text(self) -> str:
        out = [f"verdict: {self.verdict}"]
        for s in self.steps:
            out.append(f"  {s.kind}: order {s.group_order} on {s.points} points ({s.detail})")
        if self.group is not None:
            out.append(f"simple group of order {self.group.order}")
        return "\n".join(out) + "\n"


def _fpf_mask(action: GroupAction, indices: Sequence[int]) -> bool:
    imgs = action.element_images[list(indices)]
    return not np.all(imgs == np.arange(action.points), axis=0).any()


def _induced_group(action: GroupAction, points: Sequence[int]) -> GroupAction:
    """The permutation group induced on an invariant point set, acting naturally."""
    sub = restrict_action(action, points)
    gens = list(dict.fromkeys(sub.generator_images)) or [Permutation.identity(sub.points)]
    grp = FiniteGroup(gens, name=None)
    return GroupAction(grp, sub.points, grp.generators)


def reduce_to_simple(action: GroupAction, cap: int = LATTICE_CAP) -> ReduceResult:
    """Either a global fixed point, or a simple group with a fixed-point-free action
    reached through minimal fixed-point-free subgroups and quotients."""
    steps: list[ReduceStep] = []
    if action.fixed_points():
        return ReduceResult("fixed-point", None, None, steps)
    cur = action
    while True:
        grp = cur.group
        chosen = None
        for c in subgroups_up_to_conjugacy(grp, cap):
            if c.order > 1 and _fpf_mask(cur, c.indices):
                chosen = c
                break
        if chosen is None:  # unreachable when cur has no fixed point
            raise AssertionError("no fixed-point-free subgroup found")
        sub = chosen.representative
        gens = list(sub.generators)
        cur = GroupAction(sub, cur.points,
                          [Permutation(tuple(int(x) for x in cur.element_images[grp.index(g)]))
                           for g in gens])
        steps.append(ReduceStep("minimal-subgroup", sub.order, cur.points,
                                f"least order {sub.order} without a fixed point"))
        normals = normal_subgroups(sub, cap)
        if len(normals) == 2:
            steps.append(ReduceStep("simple", sub.order, cur.points, "no proper nontrivial normal subgroup"))
            return ReduceResult("simple-group", sub, cur, steps)
        n_sub = normals[1]
        idx = sub.indices_of(n_sub)
        imgs = cur.element_images[idx]
        fixed = np.nonzero(np.all(imgs == np.arange(cur.points), axis=0))[0]
        nxt = _induced_group(cur, fixed)
        if nxt.group.order >= sub.order or nxt.fixed_points():
            raise AssertionError("quotient step did not shrink the group")
        steps.append(ReduceStep("quotient", nxt.group.order, nxt.points,
                                f"normal subgroup of order {n_sub.order}, {len(fixed)} fixed points"))
        cur = nxt
