"""Built-in groups, actions and structures, addressable by short names.

Group specs: ``A5``, ``PSL27``, ``A6`` (fixed reference generator pairs),
``Z<n>`` / ``Z/<n>``, ``S<n>``, ``A<n>`` for ``n <= 7``, or a path
to a group file.  Action specs append ``:natural`` (default), ``:regular`` or
``:prim``.  Structure specs: ``T3``, ``P1``, ``C1``, ``C<n>``, a JSON path, or an
action spec (giving S(G on X) on the generators).
"""

from __future__ import annotations

import re
from pathlib import Path

from .perm import (FiniteGroup, GroupAction, Permutation, natural_action, parse_cycles,
                   prim_action, read_group_file, regular_action)
from .structures import P1, T3, RelStructure, cycle, structure_of_action

REFERENCE_GENERATORS = {
    "A5": (5, ["(3 4 5)", "(1 3)(2 4)"]),
    "PSL27": (7, ["(1 2 3 4 5 6 7)", "(2 6)(3 4)"]),
    "A6": (6, ["(1 2 3 5)(4 6)", "(1 2)(3 4)"]),
}

# reference images of f and g on prim(G), 1-based
REFERENCE_PRIM_IMAGES = {
    "A5": (21, "(3 4 5)(7 8 9)(10 11 12)(13 14 15)(16 17 18)(19 20 21)",
           "(1 3)(2 4)(6 7)(8 15)(9 10)(12 13)(18 19)(20 21)"),
    "PSL27": (22, "(1 2 3 4 5 6 7)(9 10 11 12 13 14 15)(16 17 18 19 20 21 22)",
              "(2 6)(3 4)(8 9)(10 15)(11 12)(13 14)(17 21)(19 18)"),
    "A6": (52, "(1 2 3 5)(4 6)(8 9 10 11)(12 13 14 15)(17 18)(19 20 21 22)(23 24 25 26)"
               "(27 28 29 30)(31 32 33 34)(35 36)(38 39 40 41)(42 43 44 45)(46 47 48 49)(50 51)",
           "(1 2)(3 4)(7 8)(10 12)(11 13)(15 16)(18 19)(20 21)(23 34)(24 35)(26 27)(28 31)"
           "(32 36)(33 37)(38 49)(39 52)(40 50)(41 42)(43 46)(48 51)"),
}

# reference generators for one maximal subgroup per class
REFERENCE_MAXIMAL = {
    "A5": [["(1 3)(2 5)", "(1 3 5)"], ["(1 3)(2 4)", "(1 5)(2 4)"], ["(1 4)(2 5)", "(1 3 4 2 5)"]],
    "PSL27": [["(2 7 6 5)(3 4)", "(2 7 3)(4 6 5)"], ["(1 2 4)(3 6 5)", "(1 7 6 5 4 3 2)"],
              ["(1 5)(4 6)", "(1 7)(2 3 4 6)"]],
    "A6": [["(2 3)(4 5)", "(1 2 4 3 5)"], ["(1 5 3 2)(4 6)", "(1 3 6)(2 5 4)"],
           ["(1 3 5)(2 4 6)", "(1 2 3 6 4)"], ["(1 2)(3 4 5 6)", "(1 2)(3 6 4 5)"],
           ["(1 4)(2 3)", "(1 2 5)(3 4 6)"]],
}


def _cyc(n: int) -> Permutation:
    return Permutation(tuple((i + 1) % n for i in range(n)))


def cyclic_group(n: int) -> FiniteGroup:
    return FiniteGroup([_cyc(n)], name=f"Z{n}")


def symmetric_group(n: int) -> FiniteGroup:
    if n < 3:
        return FiniteGroup([_cyc(n)], name=f"S{n}")
    swap = Permutation((1, 0) + tuple(range(2, n)))
    return FiniteGroup([swap, _cyc(n)], name=f"S{n}")


def alternating_group(n: int) -> FiniteGroup:
    key = f"A{n}"
    if key in REFERENCE_GENERATORS:
        deg, gens = REFERENCE_GENERATORS[key]
        return FiniteGroup([parse_cycles(g, deg) for g in gens], name=key)
    if n < 3:
        return FiniteGroup([Permutation.identity(max(n, 1))], name=key)
    gens = [parse_cycles(f"(1 2 {i})", n) for i in range(3, n + 1)]
    return FiniteGroup(gens, name=key)


def reference_group(name: str) -> FiniteGroup:
    deg, gens = REFERENCE_GENERATORS[name]
    return FiniteGroup([parse_cycles(g, deg) for g in gens], name=name)


def reference_prim_action(name: str) -> GroupAction:
    """The reference prim action with its own point numbering."""
    group = reference_group(name)
    points, f, g = REFERENCE_PRIM_IMAGES[name]
    return GroupAction(group, points, [parse_cycles(f, points), parse_cycles(g, points)])


def group(spec: str) -> FiniteGroup:
    s = spec.strip()
    up = s.upper().replace("/", "").replace("(", "").replace(")", "").replace(",", "")
    if up in ("PSL27", "PSL2,7"):
        return reference_group("PSL27")
    m = re.fullmatch(r"([ZSA])(\d+)", up)
    if m:
        kind, n = m.group(1), int(m.group(2))
        if n < 1 or n > 7 and kind != "Z":
            raise ValueError(f"catalog group {spec!r} out of range")
        return {"Z": cyclic_group, "S": symmetric_group, "A": alternating_group}[kind](n)
    path = Path(s)
    if path.exists():
        return read_group_file(path.read_text())
    raise ValueError(f"unknown group spec {spec!r}")


def action(spec: str) -> GroupAction:
    base, _, kind = spec.partition(":")
    grp = group(base)
    kind = kind or "natural"
    if kind == "natural":
        return natural_action(grp)
    if kind == "regular":
        return regular_action(grp)
    if kind == "prim":
        return prim_action(grp)
    raise ValueError(f"unknown action kind {kind!r}")


def structure(spec: str) -> RelStructure:
    s = spec.strip()
    up = s.upper()
    if up == "T3":
        return T3
    if up == "P1":
        return P1
    m = re.fullmatch(r"C(\d+)", up)
    if m and int(m.group(1)) >= 1:
        return cycle(int(m.group(1)))
    path = Path(s)
    if path.exists():
        return RelStructure.from_json(path.read_text())
    try:
        act = action(s)
    except ValueError:
        raise ValueError(f"unknown structure spec {spec!r}") from None
    return structure_of_action(act)
