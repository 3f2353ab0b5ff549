import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ppcon import catalog
from ppcon.conditions import find_polymorphism, make_condition
from ppcon.errors import BudgetExceeded
from ppcon.perm import (GroupAction, Permutation, coset_action, is_simple, prim_action,
                        subgroups_up_to_conjugacy)
from ppcon.pplab import (Atom, PPFormula, PPPowerSpec, chain_formula, eval_pp, has_fixed_point,
                         parse_pp, polymorphism_tables, pp_power, prim_indicator,
                         reduce_to_simple, sn_indicator)
from ppcon.structures import (C1, T3, RelStructure, compose_relation_word, cycle,
                              find_isomorphism, hom_equivalent, structure_of_action)

import oracles


# formulas --------------------------------------------------------------------

def test_parse_text_format():
    phi = parse_pp("R(x1,x3) & y2=x1 & exists z1: E(z1,x2)")
    assert phi.free == 5 and phi.existential == 1       # x1..x3, y1..y2
    assert phi.atoms[0] == Atom.rel("R", 0, 2)
    assert phi.atoms[1] == Atom.eq(4, 0)
    assert phi.atoms[2] == Atom.rel("E", 5, 1)
    assert parse_pp("bottom(x1,x2)").atoms == (Atom.bottom(0, 1),)
    assert parse_pp("E(x1,x1)", free=3).free == 3


@pytest.mark.parametrize("bad", ["E(x1,", "E(q1)", "exists x1: E(x1,x2)", "exists z1 E(z1,x1)",
                                 "E(x0,x1)", ""])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_pp(bad)


def test_formula_invariants():
    with pytest.raises(ValueError):
        PPFormula(1, 0, (Atom.rel("E", 0, 1),))
    with pytest.raises(ValueError):
        PPFormula(2, 0, (Atom("eq", (0,)),))


def test_eval_examples():
    c5 = cycle(5)
    square = eval_pp(c5, parse_pp("exists z1: E(x1,z1) & E(z1,x2)"))
    assert square == compose_relation_word(c5, [("E", 1), ("E", 1)])
    assert eval_pp(c5, parse_pp("E(x1,x2) & bottom(x1)")) == frozenset()
    assert eval_pp(c5, parse_pp("x1=x2")) == frozenset((a, a) for a in range(5))
    assert len(eval_pp(c5, parse_pp("E(x1,x1)", free=2))) == 0
    # unconstrained free variable ranges over the domain
    assert len(eval_pp(c5, parse_pp("E(x1,x2)", free=3))) == 25
    with pytest.raises(ValueError):
        eval_pp(c5, parse_pp("R(x1,x2)"))


def test_eval_budget():
    big = RelStructure(40, {"E": (2, [(a, b) for a in range(40) for b in range(40)])})
    with pytest.raises(BudgetExceeded):
        eval_pp(big, parse_pp("E(x1,x2) & E(x3,x4)"), budget=1000)


def digraph_and_formula():
    def build(n, edges, atoms_raw, nf, ne):
        s = RelStructure(n, {"E": (2, [(a % n, b % n) for a, b in edges])})
        atoms = []
        for kind, a, b in atoms_raw:
            a, b = a % (nf + ne), b % (nf + ne)
            atoms.append(Atom.rel("E", a, b) if kind == 0 else Atom.eq(a, b))
        return s, PPFormula(nf, ne, tuple(atoms))

    return st.builds(
        build, st.integers(1, 3),
        st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), max_size=5),
        st.lists(st.tuples(st.integers(0, 1), st.integers(0, 9), st.integers(0, 9)), max_size=4),
        st.integers(1, 3), st.integers(0, 2))


@given(digraph_and_formula())
def test_eval_pp_matches_naive(pair):
    s, phi = pair
    n = s.domain_size
    atoms = [("rel", a.name, a.variables) if a.kind == "rel" else ("eq", a.variables) for a in phi.atoms]
    ref = oracles.eval_pp_naive(n, {"E": set(s.tuples("E"))}, phi.free, phi.existential, atoms)
    assert eval_pp(s, phi) == frozenset(ref)


@given(st.integers(1, 4), st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=6),
       st.lists(st.sampled_from([1, -1]), max_size=4))
def test_chain_formulas_agree_with_relation_words(n, edges, dirs):
    s = RelStructure(n, {"E": (2, [(a % n, b % n) for a, b in edges])})
    word = [("E", d) for d in dirs]
    assert eval_pp(s, chain_formula(word)) == compose_relation_word(s, word)


# pp-powers -----------------------------------------------------------------------

def test_pp_power_identity():
    for s in (cycle(5), T3):
        spec = PPPowerSpec(s, 1, {"E": (2, parse_pp("E(x1,x2)"))})
        assert pp_power(spec) == s


def test_pp_power_square_of_c2():
    c2 = cycle(2)
    spec = PPPowerSpec(c2, 2, {"E": (2, parse_pp("E(x1,x3) & E(x2,x4)"))})
    sq = pp_power(spec)
    # points (a,b) -> 2a+b; edges ((a,b),(1-a,1-b))
    assert sq.domain_size == 4
    assert set(sq.tuples("E")) == {(0, 3), (3, 0), (1, 2), (2, 1)}
    with pytest.raises(ValueError):
        PPPowerSpec(c2, 2, {"E": (2, parse_pp("E(x1,x2)"))})
    with pytest.raises(BudgetExceeded):
        pp_power(PPPowerSpec(cycle(5), 9, {"E": (1, parse_pp("x1=x2", free=9))}))


def _sn_formula_spec(base, n):
    """The indicator as a pp-power: points are d^n tables (dimension d^n),
    constrained to polymorphisms, with f_sigma expressed by equalities."""
    d = base.domain_size
    cells = list(itertools.product(range(d), repeat=n))
    dim = len(cells)
    pos = {c: i for i, c in enumerate(cells)}

    def poly_atoms(offset):
        atoms = []
        for name, (arity, ts) in base.relations.items():
            for rows in itertools.product(ts, repeat=n):
                args = [offset + pos[tuple(r[j] for r in rows)] for j in range(arity)]
                atoms.append(Atom.rel(name, *args))
        return atoms

    rels = {}
    for i in range(n - 1):
        atoms = poly_atoms(0) + poly_atoms(dim)
        for c in cells:
            swapped = list(c)
            swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
            atoms.append(Atom.eq(dim + pos[c], pos[tuple(swapped)]))
        rels[f"s{i + 1}"] = (2, PPFormula(2 * dim, 0, tuple(atoms)))
    return PPPowerSpec(base, dim, rels)


def test_sn_indicator_matches_pp_power_formulas():
    for base, n in [(cycle(2), 2), (cycle(2), 3), (cycle(3), 2)]:
        power = pp_power(_sn_formula_spec(base, n))
        ind = sn_indicator(base, n)
        # the non-polymorphism points of the power carry no tuples, so the
        # power is homomorphically equivalent to its restriction to the rest
        used = sorted({x for _, ts in power.relations.values() for t in ts for x in t})
        assert len(used) == ind.domain_size
        assert find_isomorphism(power.induced(used), ind) is not None
        if power.domain_size <= 256:
            assert hom_equivalent(power, ind)


# indicators ------------------------------------------------------------------------

def test_sn_indicator_c2():
    s = sn_indicator(cycle(2), 2)
    assert s.domain_size == 4
    tables = [tuple(t) for t in s.tables.tolist()]
    assert sorted(tables) == [(0, 0, 1, 1), (0, 1, 0, 1), (1, 0, 1, 0), (1, 1, 0, 0)]
    assert not has_fixed_point(s)
    swap = dict(s.tuples("s1"))
    proj1, proj2 = tables.index((0, 0, 1, 1)), tables.index((0, 1, 0, 1))
    assert swap[proj1] == proj2 and swap[proj2] == proj1


def test_sn_indicator_examples():
    assert has_fixed_point(sn_indicator(C1, 2))
    s3 = sn_indicator(cycle(2), 3)
    maj = s3.tables.tolist().index([0, 0, 0, 1, 0, 1, 1, 1])
    assert all((maj, maj) in s3.tuples(r) for r in s3.relations)


def test_polymorphism_tables_against_brute_force():
    for base, n in [(cycle(2), 2), (T3, 2), (cycle(3), 2), (cycle(2), 3)]:
        d = base.domain_size
        ref = [t for t in oracles.all_tables(d, n) if oracles.preserves(t, d, n, base.tuples("E"))]
        assert [tuple(r) for r in polymorphism_tables(base, n).tolist()] == ref
    with pytest.raises(BudgetExceeded):
        polymorphism_tables(cycle(3), 3)


@pytest.mark.parametrize("base", [cycle(2), cycle(3), C1, T3, RelStructure(2, {"E": (2, [(0, 1)])}),
                                  RelStructure(3, {"E": (2, [(0, 1), (1, 2), (2, 0), (0, 0)])})])
@pytest.mark.parametrize("n", [2, 3])
def test_fixed_point_iff_fs_polymorphism(base, n):
    if base.domain_size ** (base.domain_size ** n) > 10**6:
        return
    found = find_polymorphism(base, make_condition("fs", n)) is not None
    assert has_fixed_point(sn_indicator(base, n)) == found


def test_prim_indicator_matches_sn_indicator_for_z2():
    p = prim_indicator(cycle(2), catalog.group("Z2"))
    s = sn_indicator(cycle(2), 2)
    renamed = RelStructure(s.domain_size, {"f": (2, s.tuples("s1"))})
    assert p == renamed


@pytest.mark.parametrize("base", [cycle(3), T3, C1, cycle(2)])
def test_prim_indicator_z2_oracle(base):
    # S(Z2 on prim) is the 2-cycle with relation f; the indicator maps into it
    # exactly when no commutative binary polymorphism exists
    ind = prim_indicator(base, catalog.group("Z2"))
    target = structure_of_action(prim_action(catalog.group("Z2")))
    found = find_polymorphism(base, make_condition("fs", 2)) is not None
    assert hom_equivalent(ind, target) == (not found)
    assert has_fixed_point(ind) == found


def test_prim_indicator_c1_loops_only():
    p = prim_indicator(C1, catalog.group("Z3"))
    assert p.domain_size == 1 and has_fixed_point(p)


def test_prim_indicator_budget_for_nonabelian():
    with pytest.raises(BudgetExceeded):
        prim_indicator(cycle(2), catalog.group("A5"))


# reduce to simple ---------------------------------------------------------------------

def _check_result(res, action):
    assert res.verdict == "simple-group"
    assert is_simple(res.group)
    assert not res.action.fixed_points()
    orders = [action.group.order] + [s.group_order for s in res.steps if s.kind != "simple"]
    for a, b in zip(orders, orders[1:]):
        assert b <= a
    quotients = [s for s in res.steps if s.kind == "quotient"]
    for q, prev in zip(quotients, [s for s in res.steps if s.kind == "minimal-subgroup"]):
        assert q.group_order < prev.group_order


def test_reduce_examples():
    res = reduce_to_simple(catalog.action("S3:natural"))
    _check_result(res, catalog.action("S3:natural"))
    assert res.group.order == 3
    res = reduce_to_simple(catalog.action("Z6:regular"))
    assert res.group.order == 2
    z2 = catalog.group("Z2")
    fixed = GroupAction(z2, 3, [Permutation((1, 0, 2))])
    assert reduce_to_simple(fixed).verdict == "fixed-point"


def test_reduce_uses_quotient():
    z4 = catalog.group("Z4")
    act = GroupAction(z4, 2, [Permutation((1, 0))])
    res = reduce_to_simple(act)
    assert [s.kind for s in res.steps] == ["minimal-subgroup", "quotient", "minimal-subgroup", "simple"]
    assert res.group.order == 2


def _random_action(rng):
    """A random small group with a random action as a union of coset actions."""
    specs = ["Z2", "Z3", "Z4", "Z6", "S3", "A4", "S4", "Z5", "A5"]
    grp = catalog.group(str(rng.choice(specs)))
    classes = subgroups_up_to_conjugacy(grp)
    parts = [coset_action(grp, classes[int(i)].representative)
             for i in rng.integers(0, len(classes), size=int(rng.integers(1, 3)))]
    images = []
    for gi in range(len(grp.generators)):
        img, offset = [], 0
        for part in parts:
            img.extend(int(x) + offset for x in part.generator_arrays[gi])
            offset += part.points
        images.append(Permutation(tuple(img)))
    return GroupAction(grp, sum(p.points for p in parts), images)


def test_reduce_random_actions():
    rng = np.random.default_rng(2024)
    simple_outcomes = 0
    for _ in range(20):
        act = _random_action(rng)
        res = reduce_to_simple(act)
        if act.fixed_points():
            assert res.verdict == "fixed-point"
        else:
            _check_result(res, act)
            simple_outcomes += 1
    assert simple_outcomes > 5
