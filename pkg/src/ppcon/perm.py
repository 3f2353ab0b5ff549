"""Finite permutation groups, group actions and primitive actions.

Groups are always concrete permutation groups.  Elements are enumerated once
and kept in lexicographic order of their image tuples, so element index 0 is
the identity and "least" always means least in that order.  Subgroups are
handled internally as boolean masks over the parent's element indices.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded

CLOSURE_CAP = 10_000
LATTICE_CAP = 400

__all__ = [
    "Permutation", "FiniteGroup", "GroupAction", "SubgroupClass", "BiactionReport",
    "parse_cycles", "generate_elements", "orbits", "stabilizer", "coset_action",
    "subgroups_up_to_conjugacy", "maximal_subgroups", "normal_subgroups", "is_simple",
    "is_primitive", "prim_action", "is_minimal_fpf", "biaction_subquotient",
    "regular_action", "natural_action", "restrict_action", "read_group_file",
    "format_group_file",
]


@dataclass(frozen=True, order=True)
class Permutation:
    """A bijection of ``{0, ..., degree-1}`` given by its image sequence."""

    images: tuple[int, ...]

    def __post_init__(self):
        imgs = tuple(int(i) for i in self.images)
        object.__setattr__(self, "images", imgs)
        if sorted(imgs) != list(range(len(imgs))):
            raise ValueError(f"not a permutation: {imgs}")

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls(tuple(range(degree)))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __mul__(self, other: "Permutation") -> "Permutation":
        # (p * q)(x) = p(q(x))
        if other.degree != self.degree:
            raise ValueError("degree mismatch")
        mine = self.images
        return Permutation(tuple(mine[i] for i in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def cycles(self) -> list[tuple[int, ...]]:
        """Nontrivial cycles, 0-based, each starting at its least point."""
        seen = [False] * self.degree
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            x = self.images[start]
            while x != start:
                cyc.append(x)
                seen[x] = True
                x = self.images[x]
            if len(cyc) > 1:
                out.append(tuple(cyc))
        return out

    def order(self) -> int:
        from math import lcm
        return lcm(*(len(c) for c in self.cycles())) if self.cycles() else 1

    def to_cycles(self) -> str:
        """1-based cycle notation; the identity prints as ``()``."""
        cyc = self.cycles()
        if not cyc:
            return "()"
        return "".join("(" + " ".join(str(x + 1) for x in c) + ")" for c in cyc)

    def __repr__(self) -> str:
        return f"Permutation({self.to_cycles()}, degree={self.degree})"


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, degree: int) -> Permutation:
    """Parse 1-based disjoint cycle notation such as ``"(1 3)(2 4)"``.

    Points may be separated by whitespace, commas or LaTeX thin spaces.
    """
    if degree < 1:
        raise ValueError("degree must be positive")
    cleaned = text.replace("\\,", " ")
    leftover = _CYCLE_RE.sub("", cleaned)
    if leftover.strip():
        raise ValueError(f"malformed cycle notation: {text!r}")
    images = list(range(degree))
    used: set[int] = set()
    for body in _CYCLE_RE.findall(cleaned):
        tokens = [t for t in re.split(r"[\s,]+", body.strip()) if t]
        try:
            pts = [int(t) - 1 for t in tokens]
        except ValueError:
            raise ValueError(f"malformed cycle notation: {text!r}") from None
        for p in pts:
            if not 0 <= p < degree:
                raise ValueError(f"point {p + 1} exceeds degree {degree}")
            if p in used:
                raise ValueError(f"point {p + 1} repeated across cycles")
            used.add(p)
        for a, b in zip(pts, pts[1:] + pts[:1]):
            images[a] = b
    return Permutation(tuple(images))


def _closure_rows(gens: np.ndarray, degree: int, cap: int) -> np.ndarray:
    """All products of the generator rows, as a lexicographically sorted array."""
    ident = np.arange(degree, dtype=np.int32)
    seen = {ident.tobytes()}
    rows = [ident]
    frontier = [ident]
    while frontier:
        new = []
        for x in frontier:
            for s in gens:
                y = s[x]
                key = y.tobytes()
                if key not in seen:
                    seen.add(key)
                    rows.append(y)
                    new.append(y)
                    if len(rows) > cap:
                        raise BudgetExceeded("group closure", cap)
        frontier = new
    arr = np.array(rows, dtype=np.int32)
    order = np.lexsort(arr.T[::-1])
    return arr[order]


def generate_elements(generators: Sequence[Permutation], cap: int = CLOSURE_CAP) -> frozenset[Permutation]:
    """Closure of ``generators`` under composition (finite, so inverses come for free)."""
    if not generators:
        raise ValueError("need at least one generator")
    degree = generators[0].degree
    if any(g.degree != degree for g in generators):
        raise ValueError("generators must share a degree")
    gens = np.array([g.images for g in generators], dtype=np.int32)
    return frozenset(Permutation(tuple(r)) for r in _closure_rows(gens, degree, cap))


class FiniteGroup:
    """A permutation group given by generators, with lazily cached element data.

    Caches are filled idempotently, so sharing instances across threads is safe
    (at worst a cache is computed twice).
    """

    def __init__(self, generators: Sequence[Permutation], name: str | None = None,
                 cap: int = CLOSURE_CAP):
        gens = tuple(generators)
        if not gens:
            raise ValueError("a group needs at least one generator")
        self.degree = gens[0].degree
        if any(g.degree != self.degree for g in gens):
            raise ValueError("generators must share a degree")
        self.generators = gens
        self.name = name
        self.cap = cap
        self._rows: np.ndarray | None = None

    @classmethod
    def _from_rows(cls, rows: np.ndarray, generators: Sequence[Permutation], name=None) -> "FiniteGroup":
        grp = cls(generators, name=name)
        grp._rows = rows
        return grp

    def __repr__(self) -> str:
        label = self.name or "group"
        return f"<FiniteGroup {label} degree={self.degree} gens={len(self.generators)}>"

    # element data -------------------------------------------------------

    @property
    def rows(self) -> np.ndarray:
        """Element images as an ``order x degree`` array, lexicographically sorted."""
        if self._rows is None:
            gens = np.array([g.images for g in self.generators], dtype=np.int32)
            self._rows = _closure_rows(gens, self.degree, self.cap)
        return self._rows

    @cached_property
    def elements(self) -> tuple[Permutation, ...]:
        return tuple(Permutation(tuple(r)) for r in self.rows)

    @property
    def order(self) -> int:
        return len(self.rows)

    def __len__(self) -> int:
        return self.order

    @cached_property
    def _index(self) -> dict[bytes, int]:
        return {r.tobytes(): i for i, r in enumerate(self.rows)}

    def index(self, perm: Permutation) -> int:
        try:
            return self._index[np.asarray(perm.images, dtype=np.int32).tobytes()]
        except KeyError:
            raise ValueError(f"{perm} is not in the group") from None

    def __contains__(self, perm: Permutation) -> bool:
        return perm.degree == self.degree and \
            np.asarray(perm.images, dtype=np.int32).tobytes() in self._index

    def _row_index(self, row: np.ndarray) -> int:
        return self._index[row.tobytes()]

    @cached_property
    def generator_indices(self) -> tuple[int, ...]:
        return tuple(self.index(g) for g in self.generators)

    @cached_property
    def mul(self) -> np.ndarray:
        """Multiplication table: ``mul[a, b]`` is the index of ``e_a * e_b``."""
        n = self.order
        if n > LATTICE_CAP * 4:
            raise BudgetExceeded("multiplication table", LATTICE_CAP * 4)
        rows = self.rows
        table = np.empty((n, n), dtype=np.int32)
        index = self._index
        for a in range(n):
            prods = rows[a][rows]
            table[a] = [index[p.tobytes()] for p in prods]
        return table

    @cached_property
    def inv(self) -> np.ndarray:
        n = self.order
        inv = np.empty(n, dtype=np.int32)
        for i, r in enumerate(self.rows):
            ri = np.empty_like(r)
            ri[r] = np.arange(self.degree, dtype=np.int32)
            inv[i] = self._row_index(ri)
        return inv

    @cached_property
    def conj(self) -> np.ndarray:
        """``conj[g, x]`` is the index of ``g x g^-1``."""
        return self.mul[self.mul, self.inv[:, None]]

    def subgroup(self, indices: Iterable[int], name: str | None = None) -> "FiniteGroup":
        """The subgroup consisting of the given element indices (assumed closed)."""
        idx = np.array(sorted(set(int(i) for i in indices)), dtype=np.int64)
        rows = self.rows[idx]
        gens = _small_generating_set(self, idx)
        return FiniteGroup._from_rows(rows, gens, name=name)

    def indices_of(self, sub: "FiniteGroup") -> np.ndarray:
        return np.array([self._row_index(r) for r in sub.rows], dtype=np.int64)

    def is_subgroup(self, sub: "FiniteGroup") -> bool:
        return sub.degree == self.degree and all(r.tobytes() in self._index for r in sub.rows)

    def closure_indices(self, gens: Iterable[int]) -> np.ndarray:
        """Indices of the subgroup generated by the given element indices."""
        gens = np.array(sorted(set(int(g) for g in gens)), dtype=np.int64)
        mul = self.mul
        seen = np.zeros(self.order, dtype=bool)
        seen[0] = True
        frontier = np.array([0], dtype=np.int64)
        while frontier.size:
            prods = np.unique(mul[frontier][:, gens].ravel()) if gens.size else np.array([], dtype=np.int64)
            new = prods[~seen[prods]]
            seen[new] = True
            frontier = new
        return np.nonzero(seen)[0]


def _small_generating_set(group: FiniteGroup, idx: np.ndarray) -> list[Permutation]:
    """Greedy generating set: scan elements in order, keep those not yet generated."""
    rows = group.rows
    if idx.size == 1:
        return [Permutation(tuple(rows[idx[0]]))]
    gens: list[np.ndarray] = []
    have: set[bytes] = {rows[0].tobytes()}
    for i in idx:
        key = rows[i].tobytes()
        if key in have:
            continue
        gens.append(rows[i])
        have = {r.tobytes() for r in _closure_rows(np.array(gens), group.degree, group.cap)}
        if len(have) == idx.size:
            break
    return [Permutation(tuple(g)) for g in gens]


# actions ----------------------------------------------------------------

class GroupAction:
    """A group together with one permutation of ``range(points)`` per generator.

    ``generator_images`` is aligned with ``group.generators`` (a mapping keyed by
    generator is accepted too).  The induced element map is computed on demand
    and validated to be a well-defined homomorphism.
    """

    def __init__(self, group: FiniteGroup, points: int, generator_images):
        if isinstance(generator_images, dict):
            generator_images = [generator_images[g] for g in group.generators]
        imgs = tuple(p if isinstance(p, Permutation) else Permutation(tuple(p))
                     for p in generator_images)
        if len(imgs) != len(group.generators):
            raise ValueError("need exactly one image per generator")
        if any(p.degree != points for p in imgs):
            raise ValueError("generator images must act on the given point set")
        self.group = group
        self.points = points
        self.generator_images = imgs
        self._elem: np.ndarray | None = None

    def __repr__(self) -> str:
        return f"<GroupAction of {self.group!r} on {self.points} points>"

    @property
    def element_images(self) -> np.ndarray:
        """``order x points`` array; row ``i`` is the image of group element ``i``."""
        if self._elem is None:
            self._elem = _induced_images(self)
        return self._elem

    def image(self, g: Permutation | int) -> Permutation:
        i = g if isinstance(g, (int, np.integer)) else self.group.index(g)
        return Permutation(tuple(self.element_images[i]))

    @cached_property
    def generator_arrays(self) -> np.ndarray:
        return np.array([p.images for p in self.generator_images], dtype=np.int64).reshape(
            len(self.generator_images), self.points)

    def fixed_points(self) -> list[int]:
        """Global fixed points."""
        fixed = np.all(self.generator_arrays == np.arange(self.points), axis=0)
        return [int(x) for x in np.nonzero(fixed)[0]]


def _induced_images(action: GroupAction) -> np.ndarray:
    group = action.group
    rows = group.rows
    n, m = group.order, action.points
    out = np.full((n, m), -1, dtype=np.int64)
    out[0] = np.arange(m)
    gen_rows = [np.array(g.images, dtype=np.int32) for g in group.generators]
    gen_imgs = action.generator_arrays
    done = np.zeros(n, dtype=bool)
    done[0] = True
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for s, s_img in zip(gen_rows, gen_imgs):
                y = group._row_index(s[rows[x]])
                img = s_img[out[x]]
                if done[y]:
                    if not np.array_equal(out[y], img):
                        raise ValueError("generator images do not extend to a homomorphism")
                else:
                    out[y] = img
                    done[y] = True
                    nxt.append(y)
        frontier = nxt
    return out


def natural_action(group: FiniteGroup) -> GroupAction:
    return GroupAction(group, group.degree, group.generators)


def regular_action(group: FiniteGroup) -> GroupAction:
    """Left multiplication on the group's own elements."""
    return coset_action(group, FiniteGroup([Permutation.identity(group.degree)]))


def orbits(action: GroupAction) -> list[list[int]]:
    """Orbit partition, blocks sorted internally and by least point."""
    m = action.points
    parent = list(range(m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for img in action.generator_arrays:
        for x in range(m):
            a, b = find(x), find(int(img[x]))
            if a != b:
                parent[max(a, b)] = min(a, b)
    blocks: dict[int, list[int]] = {}
    for x in range(m):
        blocks.setdefault(find(x), []).append(x)
    return sorted(blocks.values(), key=lambda b: b[0])


def stabilizer(action: GroupAction, target, mode: str = "point") -> FiniteGroup:
    """Point stabilizer, or setwise stabilizer when ``mode == "setwise"``."""
    imgs = action.element_images
    if mode == "point":
        x = int(target)
        if not 0 <= x < action.points:
            raise ValueError("point out of range")
        keep = np.nonzero(imgs[:, x] == x)[0]
    elif mode == "setwise":
        s = sorted(set(int(t) for t in target))
        if not s:
            raise ValueError("empty target set")
        if s[0] < 0 or s[-1] >= action.points:
            raise ValueError("point out of range")
        member = np.zeros(action.points, dtype=bool)
        member[s] = True
        keep = np.nonzero(member[imgs[:, s]].all(axis=1))[0]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return action.group.subgroup(keep)


def coset_action(group: FiniteGroup, subgroup: FiniteGroup) -> GroupAction:
    """Left multiplication on left cosets ``gH``.

    Cosets are numbered by their least element, so the coset ``H`` is point 0.
    """
    if not group.is_subgroup(subgroup):
        raise ValueError("subgroup is not contained in group")
    n = group.order
    h_rows = subgroup.rows
    rows = group.rows
    coset_of = np.full(n, -1, dtype=np.int64)
    reps = []
    for g in range(n):
        if coset_of[g] >= 0:
            continue
        members = [group._row_index(rows[g][h]) for h in h_rows]
        coset_of[members] = len(reps)
        reps.append(g)
    images = []
    for s in group.generators:
        s_arr = np.array(s.images, dtype=np.int32)
        images.append(Permutation(tuple(int(coset_of[group._row_index(s_arr[rows[r]])]) for r in reps)))
    return GroupAction(group, len(reps), images)


def restrict_action(action: GroupAction, points: Sequence[int]) -> GroupAction:
    """Restriction to an invariant point subset, renumbered in increasing order."""
    pts = sorted(int(p) for p in points)
    pos = {p: i for i, p in enumerate(pts)}
    images = []
    for img in action.generator_arrays:
        try:
            images.append(Permutation(tuple(pos[int(img[p])] for p in pts)))
        except KeyError:
            raise ValueError("point set is not invariant") from None
    return GroupAction(action.group, len(pts), images)


# subgroup lattice ----------------------------------------------------------

@dataclass(frozen=True)
class SubgroupClass:
    """A conjugacy class of subgroups, represented by its least conjugate."""

    representative: FiniteGroup
    class_size: int
    order: int
    indices: tuple[int, ...]  # element indices of the representative in the parent


class _Lattice:
    """All subgroups of a small group, grouped by conjugacy."""

    def __init__(self, group: FiniteGroup, cap: int):
        if group.order > cap:
            raise BudgetExceeded("subgroup lattice group order", cap)
        self.group = group
        n = group.order
        self.n = n
        conj = group.conj
        self.classes: list[dict] = []
        self.member_of: dict[bytes, int] = {}

        cyclic: dict[bytes, int] = {}
        for g in range(n):
            mask = self._mask(group.closure_indices([g]))
            cyclic.setdefault(mask.tobytes(), g)
        self.cyclic = [(np.frombuffer(k, dtype=bool), g) for k, g in cyclic.items()]

        queue = []
        for mask, g in self.cyclic:
            cid = self._register(mask, [g], conj)
            if cid is not None:
                queue.append(cid)
        while queue:
            cid = queue.pop()
            info = self.classes[cid]
            rep_mask = info["mask"]
            for cmask, c in self.cyclic:
                if rep_mask[c]:
                    continue
                gens = info["gens"] + [c]
                joined = self._mask(group.closure_indices(gens))
                if joined.tobytes() in self.member_of:
                    continue
                new = self._register(joined, gens, conj)
                if new is not None:
                    queue.append(new)

    def _mask(self, idx: np.ndarray) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[idx] = True
        return m

    def _register(self, mask: np.ndarray, gens: list[int], conj: np.ndarray) -> int | None:
        if mask.tobytes() in self.member_of:
            return None
        elems = np.nonzero(mask)[0]
        images = conj[:, elems]
        mats = np.zeros((self.n, self.n), dtype=bool)
        mats[np.arange(self.n)[:, None], images] = True
        uniq = {row.tobytes(): row for row in mats}
        cid = len(self.classes)
        for key in uniq:
            self.member_of[key] = cid
        sorted_rows = np.sort(images, axis=1)
        best = sorted_rows[np.lexsort(sorted_rows.T[::-1])[0]]
        best_mask = self._mask(best)
        # generators of the least conjugate: conjugate the known gens by a witness element
        witness = int(np.nonzero((mats == best_mask).all(axis=1))[0][0])
        rep_gens = [int(conj[witness, g]) for g in gens]
        self.classes.append({
            "mask": best_mask, "gens": rep_gens, "order": int(elems.size),
            "size": len(uniq), "key": tuple(int(x) for x in best),
            "conjugates": [np.frombuffer(k, dtype=bool) for k in uniq],
        })
        return cid

    def sorted_classes(self) -> list[dict]:
        return sorted(self.classes, key=lambda c: (c["order"], c["key"]))


def _lattice(group: FiniteGroup, cap: int = LATTICE_CAP) -> _Lattice:
    lat = getattr(group, "_lattice_cache", None)
    if lat is None:
        lat = _Lattice(group, cap)
        group._lattice_cache = lat
    return lat


def _to_class(group: FiniteGroup, info: dict) -> SubgroupClass:
    rep = group.subgroup(info["key"])
    return SubgroupClass(rep, info["size"], info["order"], info["key"])


def subgroups_up_to_conjugacy(group: FiniteGroup, cap: int = LATTICE_CAP) -> list[SubgroupClass]:
    """One class per conjugacy class of subgroups, sorted by (order, least conjugate)."""
    return [_to_class(group, c) for c in _lattice(group, cap).sorted_classes()]


def _maximal_infos(group: FiniteGroup, cap: int) -> list[dict]:
    lat = _lattice(group, cap)
    n = group.order
    as_int = []
    for c in lat.classes:
        if c["order"] < n:
            for m in c["conjugates"]:
                as_int.append((c["order"], int.from_bytes(np.packbits(m).tobytes(), "big")))
    out = []
    for c in lat.sorted_classes():
        if c["order"] >= n:
            continue
        h = int.from_bytes(np.packbits(c["mask"]).tobytes(), "big")
        if not any(o > c["order"] and (h & k) == h for o, k in as_int):
            out.append(c)
    return out


def maximal_subgroups(group: FiniteGroup, cap: int = LATTICE_CAP) -> list[SubgroupClass]:
    """Conjugacy classes of maximal proper subgroups, in canonical class order."""
    if group.order < 2:
        raise ValueError("the trivial group has no maximal subgroup")
    return [_to_class(group, c) for c in _maximal_infos(group, cap)]


def normal_subgroups(group: FiniteGroup, cap: int = LATTICE_CAP) -> list[FiniteGroup]:
    """All normal subgroups, trivial and full included, in canonical order."""
    return [group.subgroup(c["key"]) for c in _lattice(group, cap).sorted_classes()
            if c["size"] == 1]


def is_simple(group: FiniteGroup, cap: int = LATTICE_CAP) -> bool:
    return len(normal_subgroups(group, cap)) == 2


def _minimal_block(action: GroupAction, a: int, b: int) -> int:
    """Size of the finest invariant partition's block containing ``a`` and ``b``."""
    parent = list(range(action.points))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    gens = [list(map(int, g)) for g in action.generator_arrays]
    pending = [(a, b)]
    parent[find(b)] = find(a)
    while pending:
        x, y = pending.pop()
        for g in gens:
            u, v = find(g[x]), find(g[y])
            if u != v:
                parent[v] = u
                pending.append((g[x], g[y]))
    root = find(a)
    return sum(1 for x in range(action.points) if find(x) == root)


def is_primitive(action: GroupAction) -> bool:
    """True iff at least two points, transitive, and only trivial block systems."""
    m = action.points
    if m < 2 or len(orbits(action)) != 1:
        return False
    return all(_minimal_block(action, 0, b) == m for b in range(1, m))


def prim_action(group: FiniteGroup, cap: int = LATTICE_CAP) -> GroupAction:
    """Disjoint union of ``G/M`` over the maximal subgroup classes, in class order."""
    if group.order < 2:
        raise ValueError("the trivial group has no maximal subgroup")
    parts = [coset_action(group, c.representative) for c in maximal_subgroups(group, cap)]
    images = []
    for gi in range(len(group.generators)):
        img: list[int] = []
        offset = 0
        for part in parts:
            img.extend(int(x) + offset for x in part.generator_arrays[gi])
            offset += part.points
        images.append(Permutation(tuple(img)))
    act = GroupAction(group, sum(p.points for p in parts), images)
    act.component_sizes = tuple(p.points for p in parts)
    return act


def is_minimal_fpf(action: GroupAction, cap: int = LATTICE_CAP) -> bool:
    """No global fixed point, while every maximal subgroup fixes some point."""
    if action.fixed_points():
        return False
    if action.group.order < 2:
        return False
    imgs = action.element_images
    ident = np.arange(action.points)
    for c in maximal_subgroups(action.group, cap):
        fixed = np.all(imgs[list(c.indices)] == ident, axis=0)
        if not fixed.any():
            return False
    return True


# biactions ---------------------------------------------------------------

@dataclass(frozen=True)
class BiactionReport:
    z_size: int
    stab_g_t: int
    stab_g_orbit: int
    stab_h_t: int
    stab_h_orbit: int
    passed: bool
    failures: tuple[str, ...] = ()


def biaction_subquotient(gact: GroupAction, hact: GroupAction, t: Sequence[int],
                         budget: int = 10**6) -> BiactionReport:
    """Check the subquotient isomorphism for ``t: Y -> X``.

    ``G`` acts on ``X^Y`` by post-composition and ``H`` by pre-composition
    ``t_h(y) = t(h.y)``.  The returned flag is the conjunction of both coset
    bijections onto ``Z_t``, both normality claims, agreement of the two
    induced products on ``Z_t`` and the homomorphism property of the induced
    map ``g stab_G(t) -> stab_H(t) h``.
    """
    t = np.asarray(t, dtype=np.int64)
    if t.shape != (hact.points,) or t.min() < 0 or t.max() >= gact.points:
        raise ValueError("t must be a map from the H-points to the G-points")
    G, H = gact.element_images, hact.element_images
    if len(G) * len(H) > budget:
        raise BudgetExceeded("biaction pair enumeration", budget)
    g_t = G[:, t]                     # row g: g.t
    h_t = t[H]                        # row h: t_h
    key = lambda a: a.tobytes()
    g_orbit = {key(r) for r in g_t}
    h_orbit = {key(r) for r in h_t}
    z = g_orbit & h_orbit
    t_key = key(t)
    sg_t = [g for g in range(len(G)) if key(g_t[g]) == t_key]
    sg_orb = [g for g in range(len(G)) if key(g_t[g]) in h_orbit]
    sh_t = [h for h in range(len(H)) if key(h_t[h]) == t_key]
    sh_orb = [h for h in range(len(H)) if key(h_t[h]) in g_orbit]
    fails = []

    # coset maps: fibres are exactly the cosets iff image is Z_t and sizes match
    if {key(g_t[g]) for g in sg_orb} != z or len(sg_orb) != len(sg_t) * len(z):
        fails.append("G-side map is not a bijection onto Z_t")
    if {key(h_t[h]) for h in sh_orb} != z or len(sh_orb) != len(sh_t) * len(z):
        fails.append("H-side map is not a bijection onto Z_t")

    ggrp, hgrp = gact.group, hact.group
    sg_t_set, sh_t_set = set(sg_t), set(sh_t)
    gmul, ginv = _mul_and_inv(ggrp)
    hmul, hinv = _mul_and_inv(hgrp)
    if any(gmul(gmul(g, s), ginv(g)) not in sg_t_set for g in sg_orb for s in sg_t):
        fails.append("stab_G(t) is not normal in stab_G(H(t))")
    if any(hmul(hmul(h, s), hinv(h)) not in sh_t_set for h in sh_orb for s in sh_t):
        fails.append("stab_H(t) is not normal in stab_H(G(t))")

    # both products on Z_t agree: g.(t_h) == (g.t)_h
    for g in sg_orb:
        for h in sh_orb:
            if not np.array_equal(G[g][h_t[h]], g_t[g][H[h]]):
                fails.append("induced products on Z_t differ")
                break
        else:
            continue
        break

    # induced map is a homomorphism onto the quotient
    h_for = {}
    for h in sh_orb:
        h_for.setdefault(key(h_t[h]), h)
    psi = {g: h_for[key(g_t[g])] for g in sg_orb}
    for g1 in sg_orb:
        for g2 in sg_orb:
            lhs = key(g_t[gmul(g1, g2)])
            rhs = key(h_t[hmul(psi[g1], psi[g2])])
            if lhs != rhs:
                fails.append("induced map is not a homomorphism")
                break
        else:
            continue
        break

    return BiactionReport(len(z), len(sg_t), len(sg_orb), len(sh_t), len(sh_orb),
                          not fails, tuple(fails))


def _mul_and_inv(group: FiniteGroup):
    if group.order <= LATTICE_CAP * 4:
        mul, inv = group.mul, group.inv
        return (lambda a, b: int(mul[a, b])), (lambda a: int(inv[a]))
    rows = group.rows
    return (lambda a, b: group._row_index(rows[a][rows[b]])), \
        (lambda a: group._row_index(np.argsort(rows[a]).astype(np.int32)))


# group files -------------------------------------------------------------

def read_group_file(text: str) -> FiniteGroup:
    """Parse the line-based group format (``name``, ``degree``, ``gen`` lines)."""
    name, degree, gens = None, None, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "name":
            name = rest
        elif word == "degree":
            degree = int(rest)
        elif word == "gen":
            if degree is None:
                raise ValueError(f"line {lineno}: 'gen' before 'degree'")
            gens.append(parse_cycles(rest, degree))
        else:
            raise ValueError(f"line {lineno}: unknown keyword {word!r}")
    if degree is None:
        raise ValueError("missing 'degree' line")
    if not gens:
        gens = [Permutation.identity(degree)]
    return FiniteGroup(gens, name=name)


def format_group_file(group: FiniteGroup) -> str:
    lines = []
    if group.name:
        lines.append(f"name {group.name}")
    lines.append(f"degree {group.degree}")
    lines.extend(f"gen {g.to_cycles()}" for g in group.generators)
    return "\n".join(lines) + "\n"
