"""Small finite-domain constraint solver shared by the homomorphism and
polymorphism searches.

Domains are bitmasks (Python ints).  Constraints are extensional: a tuple of
variables together with the allowed value tuples.  Propagation is generalized
arc consistency; search is depth-first with an explicit stack.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Sequence

from .errors import BudgetExceeded


class CSP:
    def __init__(self, n_vars: int, domain_size: int):
        self.n_vars = n_vars
        self.domain_size = domain_size
        full = (1 << domain_size) - 1
        self.domains = [full] * n_vars
        self._rels: list[tuple[tuple[int, ...], ...]] = []
        self._rel_ids: dict[frozenset, int] = {}
        self.constraints: list[tuple[tuple[int, ...], int]] = []
        self._seen: set[tuple[tuple[int, ...], int]] = set()
        self.watch: dict[int, list[int]] = defaultdict(list)

    def relation(self, tuples) -> int:
        key = frozenset(tuple(t) for t in tuples)
        rid = self._rel_ids.get(key)
        if rid is None:
            rid = len(self._rels)
            self._rels.append(tuple(sorted(key)))
            self._rel_ids[key] = rid
        return rid

    def restrict(self, var: int, values) -> None:
        mask = 0
        for v in values:
            mask |= 1 << v
        self.domains[var] &= mask

    def add(self, variables: Sequence[int], rid: int) -> None:
        c = (tuple(variables), rid)
        if c in self._seen:
            return
        self._seen.add(c)
        idx = len(self.constraints)
        self.constraints.append(c)
        for v in set(c[0]):
            self.watch[v].append(idx)

    def _revise(self, doms: list[int], cidx: int) -> list[int] | None:
        """Prune by one constraint; returns changed variables or None on wipe-out."""
        variables, rid = self.constraints[cidx]
        k = len(variables)
        supp = [0] * k
        for t in self._rels[rid]:
            ok = True
            for i in range(k):
                if not (doms[variables[i]] >> t[i]) & 1:
                    ok = False
                    break
            if ok and len(set(variables)) < k:
                seen = {}
                for i, v in enumerate(variables):
                    if seen.setdefault(v, t[i]) != t[i]:
                        ok = False
                        break
            if ok:
                for i in range(k):
                    supp[i] |= 1 << t[i]
        changed = []
        for i, v in enumerate(variables):
            new = doms[v] & supp[i]
            if new != doms[v]:
                if not new:
                    return None
                doms[v] = new
                changed.append(v)
        return changed

    def _propagate(self, doms: list[int], queue: list[int]) -> bool:
        pending = set(queue)
        queue = list(queue)
        while queue:
            c = queue.pop()
            pending.discard(c)
            changed = self._revise(doms, c)
            if changed is None:
                return False
            for v in changed:
                for c2 in self.watch[v]:
                    if c2 not in pending:
                        pending.add(c2)
                        queue.append(c2)
        return True

    def solve(self, order: str = "mrv", budget: int = 10**8) -> list[int] | None:
        """First solution in the chosen variable order (values ascending), or None."""
        doms = list(self.domains)
        if any(d == 0 for d in doms):
            return None
        if not self._propagate(doms, list(range(len(self.constraints)))):
            return None
        nodes = 0
        stack = [(doms, None, [])]
        while stack:
            doms, var, values = stack[-1]
            if var is None:
                var = self._choose(doms, order)
                if var is None:
                    return [d.bit_length() - 1 for d in doms]
                values = [b for b in range(self.domain_size) if (doms[var] >> b) & 1]
                stack[-1] = (doms, var, values)
            if not values:
                stack.pop()
                continue
            val = values.pop(0)
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded("search nodes", budget)
            child = list(doms)
            child[var] = 1 << val
            if self._propagate(child, list(self.watch[var])):
                stack.append((child, None, []))
        return None

    @staticmethod
    def _choose(doms: list[int], order: str) -> int | None:
        if order == "lex":
            for i, d in enumerate(doms):
                if d & (d - 1):
                    return i
            return None
        best, best_size = None, None
        for i, d in enumerate(doms):
            if d & (d - 1):
                size = bin(d).count("1")
                if best_size is None or size < best_size:
                    best, best_size = i, size
                    if size == 2:
                        break
        return best
