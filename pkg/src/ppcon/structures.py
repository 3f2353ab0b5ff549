"""Relational structures, structures of group actions, and homomorphism search."""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._csp import CSP
from .perm import GroupAction

__all__ = [
    "RelStructure", "Homomorphism", "structure_of_action", "connected_components",
    "find_homomorphism", "hom_equivalent", "find_isomorphism", "isomorphic",
    "dual_pairing", "compose_relation_word", "cycle", "T3", "C1", "P1",
    "generator_names",
]

SEARCH_BUDGET = 10**7


class RelStructure:
    """Finite structure on ``range(domain_size)`` with named relations.

    Relations are stored as sorted tuples of tuples; instances are treated as
    immutable.
    """

    def __init__(self, domain_size: int, relations: Mapping[str, tuple[int, Iterable[Sequence[int]]]]):
        if domain_size < 1:
            raise ValueError("domain must be nonempty")
        self.domain_size = domain_size
        rels = {}
        for name, (arity, tuples) in relations.items():
            ts = sorted({tuple(int(x) for x in t) for t in tuples})
            for t in ts:
                if len(t) != arity:
                    raise ValueError(f"tuple {t} in {name!r} does not have arity {arity}")
                if any(not 0 <= x < domain_size for x in t):
                    raise ValueError(f"tuple {t} in {name!r} leaves the domain")
            rels[name] = (arity, tuple(ts))
        self.relations = dict(sorted(rels.items()))

    def __repr__(self) -> str:
        sig = ", ".join(f"{n}/{a}:{len(t)}" for n, (a, t) in self.relations.items())
        return f"<RelStructure domain={self.domain_size} {sig}>"

    def __eq__(self, other) -> bool:
        return isinstance(other, RelStructure) and self.domain_size == other.domain_size \
            and self.relations == other.relations

    def __hash__(self):
        return hash((self.domain_size, tuple(self.relations.items())))

    def tuples(self, name: str) -> tuple[tuple[int, ...], ...]:
        return self.relations[name][1]

    def arity(self, name: str) -> int:
        return self.relations[name][0]

    def reduct(self, names: Iterable[str]) -> "RelStructure":
        return RelStructure(self.domain_size, {n: self.relations[n] for n in names})

    def induced(self, points: Sequence[int]) -> "RelStructure":
        """Substructure on ``points``, renumbered in the given order."""
        pos = {p: i for i, p in enumerate(points)}
        rels = {}
        for name, (arity, ts) in self.relations.items():
            rels[name] = (arity, [tuple(pos[x] for x in t) for t in ts if all(x in pos for x in t)])
        return RelStructure(len(points), rels)

    def reversed(self) -> "RelStructure":
        """Every tuple read backwards (edge reversal for binary relations)."""
        return RelStructure(self.domain_size, {n: (a, [t[::-1] for t in ts])
                                               for n, (a, ts) in self.relations.items()})

    def to_json(self) -> str:
        data = {"domain": self.domain_size,
                "relations": {n: {"arity": a, "tuples": [list(t) for t in ts]}
                              for n, (a, ts) in self.relations.items()}}
        return json.dumps(data, sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RelStructure":
        data = json.loads(text)
        return cls(int(data["domain"]), {n: (int(r["arity"]), r["tuples"])
                                         for n, r in data["relations"].items()})


def cycle(n: int) -> RelStructure:
    """The directed cycle C_n."""
    return RelStructure(n, {"E": (2, [(i, (i + 1) % n) for i in range(n)])})


C1 = cycle(1)
P1 = RelStructure(2, {"E": (2, [(0, 1)])})
T3 = RelStructure(3, {"E": (2, [(0, 1), (0, 2), (1, 2)])})


@dataclass(frozen=True)
class Homomorphism:
    source: RelStructure
    target: RelStructure
    map: tuple[int, ...]

    def __post_init__(self):
        for name, (_, ts) in self.source.relations.items():
            image = set(self.target.tuples(name)) if name in self.target.relations else set()
            for t in ts:
                if tuple(self.map[x] for x in t) not in image:
                    raise ValueError(f"not a homomorphism: {t} in {name!r}")


def generator_names(count: int) -> list[str]:
    """Relation names for generators: f, g, h, ... (f0, f1, ... beyond the alphabet)."""
    letters = string.ascii_lowercase[5:]
    if count <= len(letters):
        return list(letters[:count])
    return [f"f{i}" for i in range(count)]


def structure_of_action(action: GroupAction, labels: str = "generators",
                        names: Sequence[str] | None = None) -> RelStructure:
    """One binary relation ``{(x, g.x)}`` per generator, or per element with
    ``labels="all"`` (named ``e<index>`` in element order)."""
    if labels == "generators":
        imgs = action.generator_arrays
        names = list(names) if names is not None else generator_names(len(imgs))
    elif labels == "all":
        imgs = action.element_images
        names = list(names) if names is not None else [f"e{i}" for i in range(len(imgs))]
    else:
        raise ValueError(f"unknown labels mode {labels!r}")
    if len(names) != len(imgs):
        raise ValueError("one name per relation required")
    return RelStructure(action.points, {n: (2, [(x, int(img[x])) for x in range(action.points)])
                                        for n, img in zip(names, imgs)})


def connected_components(structure: RelStructure) -> list[list[int]]:
    """Weak components: all entries of a tuple are adjacent."""
    n = structure.domain_size
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for _, ts in structure.relations.values():
        for t in ts:
            for a, b in zip(t, t[1:]):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    comps: dict[int, list[int]] = {}
    for x in range(n):
        comps.setdefault(find(x), []).append(x)
    return sorted(comps.values(), key=lambda c: c[0])


def _hom_csp(source: RelStructure, target: RelStructure) -> CSP | None:
    csp = CSP(source.domain_size, target.domain_size)
    for name, (arity, ts) in source.relations.items():
        if not ts:
            continue
        if name not in target.relations or target.arity(name) != arity:
            return None
        rid = csp.relation(target.tuples(name))
        for t in ts:
            csp.add(t, rid)
    return csp


def find_homomorphism(source: RelStructure, target: RelStructure,
                      budget: int = SEARCH_BUDGET) -> Homomorphism | None:
    """Complete backtracking search with arc consistency, smallest domain first.

    Raises ``BudgetExceeded`` when the node cap is hit.
    """
    csp = _hom_csp(source, target)
    if csp is None:
        return None
    sol = csp.solve(order="mrv", budget=budget)
    return None if sol is None else Homomorphism(source, target, tuple(sol))


def hom_equivalent(a: RelStructure, b: RelStructure, budget: int = SEARCH_BUDGET) -> bool:
    return find_homomorphism(a, b, budget) is not None and \
        find_homomorphism(b, a, budget) is not None


def _signature(structure: RelStructure) -> list[tuple]:
    n = structure.domain_size
    sig = [[] for _ in range(n)]
    for name, (arity, ts) in structure.relations.items():
        counts = np.zeros((n, arity), dtype=np.int64)
        for t in ts:
            for i, x in enumerate(t):
                counts[x, i] += 1
        for x in range(n):
            sig[x].append(tuple(counts[x]))
    return [tuple(s) for s in sig]


def find_isomorphism(a: RelStructure, b: RelStructure,
                     budget: int = SEARCH_BUDGET) -> tuple[int, ...] | None:
    """Relation-name-preserving isomorphism, by backtracking with degree pruning."""
    if a.domain_size != b.domain_size or set(a.relations) != set(b.relations):
        return None
    for name in a.relations:
        if a.arity(name) != b.arity(name) or len(a.tuples(name)) != len(b.tuples(name)):
            return None
    sa, sb = _signature(a), _signature(b)
    if sorted(sa) != sorted(sb):
        return None
    csp = _hom_csp(a, b)
    if csp is None:
        return None
    n = a.domain_size
    for x in range(n):
        csp.restrict(x, [y for y in range(n) if sb[y] == sa[x]])
    if n > 1:
        neq = csp.relation([(i, j) for i in range(n) for j in range(n) if i != j])
        for x in range(n):
            for y in range(x + 1, n):
                csp.add((x, y), neq)
    sol = csp.solve(order="mrv", budget=budget)
    return None if sol is None else tuple(sol)


def isomorphic(a: RelStructure, b: RelStructure, budget: int = SEARCH_BUDGET) -> bool:
    """Isomorphism tested component by component."""
    if a.domain_size != b.domain_size or set(a.relations) != set(b.relations):
        return False
    ca = [a.induced(c) for c in connected_components(a)]
    cb = [b.induced(c) for c in connected_components(b)]
    if sorted(c.domain_size for c in ca) != sorted(c.domain_size for c in cb):
        return False
    unused = list(range(len(cb)))
    for comp in ca:
        for j in unused:
            if find_isomorphism(comp, cb[j], budget) is not None:
                unused.remove(j)
                break
        else:
            return False
    return True


def dual_pairing(structure: RelStructure, budget: int = SEARCH_BUDGET) -> dict[int, int | None]:
    """For each component (by index), the first component isomorphic to its reversal."""
    if any(a != 2 for a, _ in structure.relations.values()):
        raise ValueError("dual pairing needs binary relations")
    comps = [structure.induced(c) for c in connected_components(structure)]
    out: dict[int, int | None] = {}
    for i, c in enumerate(comps):
        rev = c.reversed()
        out[i] = next((j for j, d in enumerate(comps)
                       if find_isomorphism(rev, d, budget) is not None), None)
    return out


def compose_relation_word(structure: RelStructure, word: Sequence[tuple[str, int]]) -> frozenset[tuple[int, int]]:
    """Relational composition along ``word``, first letter applied first.

    Each letter is ``(name, +1)`` or ``(name, -1)`` for the inverse relation;
    the empty word gives the identity relation.
    """
    n = structure.domain_size
    cur = np.eye(n, dtype=bool)
    for name, direction in word:
        if structure.arity(name) != 2:
            raise ValueError(f"relation {name!r} is not binary")
        step = np.zeros((n, n), dtype=bool)
        for x, y in structure.tuples(name):
            step[x, y] = True
        if direction in (-1, "reverse", "-"):
            step = step.T
        cur = (cur.astype(np.int64) @ step.astype(np.int64)) > 0
    xs, ys = np.nonzero(cur)
    return frozenset(zip(xs.tolist(), ys.tolist()))
