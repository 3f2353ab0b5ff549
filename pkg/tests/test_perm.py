import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ppcon import catalog
from ppcon.errors import BudgetExceeded
from ppcon.perm import (FiniteGroup, GroupAction, Permutation, biaction_subquotient, coset_action,
                        format_group_file, generate_elements, is_minimal_fpf, is_primitive,
                        is_simple, maximal_subgroups, natural_action, normal_subgroups, orbits,
                        parse_cycles, prim_action, read_group_file, regular_action,
                        restrict_action, stabilizer, subgroups_up_to_conjugacy)

import oracles


def perms(n):
    return st.permutations(list(range(n))).map(lambda p: Permutation(tuple(p)))


# permutations ---------------------------------------------------------------

def test_parse_and_print_cycles():
    p = parse_cycles("(1 3)(2 4)", 5)
    assert p.images == (2, 3, 0, 1, 4)
    assert p.to_cycles() == "(1 3)(2 4)"
    assert parse_cycles("(1,2,3)", 3) == parse_cycles("(1 2 3)", 3)
    assert parse_cycles("()", 3).is_identity()
    assert p.order() == 2


@pytest.mark.parametrize("bad", ["(1 1)", "(1 9)", "(1 2", "1 2", "(0 1)", "(a b)"])
def test_parse_cycles_rejects(bad):
    with pytest.raises(ValueError):
        parse_cycles(bad, 5)


@given(perms(6), perms(6), perms(6))
def test_permutation_group_axioms(a, b, c):
    ident = Permutation.identity(6)
    assert (a * b) * c == a * (b * c)
    assert a * ident == a == ident * a
    assert a * a.inverse() == ident
    assert (a * b)(0) == a(b(0))


@given(perms(5))
def test_cycle_roundtrip(p):
    assert parse_cycles(p.to_cycles(), 5) == p
    assert p.order() == math.lcm(*[len(c) for c in p.cycles()] or [1])


# groups ---------------------------------------------------------------------

@pytest.mark.parametrize("spec,order", [("Z1", 1), ("Z6", 6), ("S3", 6), ("S4", 24), ("S5", 120),
                                        ("A4", 12), ("A5", 60), ("A6", 360), ("PSL27", 168),
                                        ("S6", 720), ("A7", 2520)])
def test_group_orders(spec, order):
    assert catalog.group(spec).order == order


@pytest.mark.parametrize("spec", ["S4", "A5", "PSL27"])
def test_closure_matches_bfs_oracle(spec):
    grp = catalog.group(spec)
    ref = oracles.closure([g.images for g in grp.generators])
    assert {e.images for e in grp.elements} == ref
    assert generate_elements(grp.generators) == frozenset(grp.elements)


def test_closure_cap():
    with pytest.raises(BudgetExceeded):
        FiniteGroup(catalog.symmetric_group(6).generators, cap=100).order


def test_identity_is_first_and_tables_consistent():
    grp = catalog.group("S4")
    assert grp.elements[0].is_identity()
    mul, inv = grp.mul, grp.inv
    rng = np.random.default_rng(0)
    for a, b, c in rng.integers(0, grp.order, size=(200, 3)):
        assert mul[mul[a, b], c] == mul[a, mul[b, c]]
        assert grp.elements[mul[a, b]] == grp.elements[a] * grp.elements[b]
        assert mul[a, inv[a]] == 0


@given(st.lists(perms(5), min_size=1, max_size=2), st.integers(0, 4))
def test_orbit_stabilizer(gens, x):
    grp = FiniteGroup(gens)
    act = natural_action(grp)
    orbit = next(o for o in orbits(act) if x in o)
    assert len(orbit) * stabilizer(act, x).order == grp.order


def test_setwise_stabilizer():
    act = natural_action(catalog.group("S4"))
    assert stabilizer(act, [0, 1], mode="setwise").order == 4
    with pytest.raises(ValueError):
        stabilizer(act, [7], mode="setwise")


@pytest.mark.parametrize("spec,classes", [("S3", 4), ("Z6", 4), ("S4", 11), ("A4", 5), ("A5", 9)])
def test_subgroup_class_counts(spec, classes):
    grp = catalog.group(spec)
    ours = subgroups_up_to_conjugacy(grp)
    assert len(ours) == classes
    ref = oracles.conjugacy_classes_of_subgroups([e.images for e in grp.elements])
    assert sorted((c.order, c.class_size) for c in ours) == ref


def test_canonical_order_is_sorted():
    classes = subgroups_up_to_conjugacy(catalog.group("S4"))
    keys = [(c.order, c.indices) for c in classes]
    assert keys == sorted(keys)
    assert classes[0].order == 1 and classes[-1].order == 24


@pytest.mark.parametrize("spec", ["S4", "A5", "A4", "Z6"])
def test_maximal_subgroups_against_oracle(spec):
    grp = catalog.group(spec)
    ref = oracles.maximal_orders([e.images for e in grp.elements])
    ours = sorted(o for c in maximal_subgroups(grp) for o in [c.order] * c.class_size)
    assert ours == ref


def test_maximal_subgroups_of_reference_groups():
    # index sets of the maximal subgroup classes
    assert sorted(c.order for c in maximal_subgroups(catalog.group("A5"))) == [6, 10, 12]
    assert sorted(c.order for c in maximal_subgroups(catalog.group("PSL27"))) == [21, 24, 24]


def test_reference_maximal_generators_generate_maximal_subgroups():
    for name, lists in catalog.REFERENCE_MAXIMAL.items():
        if name == "A6":
            continue
        grp = catalog.reference_group(name)
        deg = grp.degree
        ours = sorted(c.order for c in maximal_subgroups(grp))
        theirs = sorted(FiniteGroup([parse_cycles(g, deg) for g in gens]).order for gens in lists)
        assert ours == theirs


def test_normal_subgroups_and_simplicity():
    assert [n.order for n in normal_subgroups(catalog.group("S4"))] == [1, 4, 12, 24]
    assert is_simple(catalog.group("A5")) and is_simple(catalog.group("Z5"))
    assert not is_simple(catalog.group("S3")) and not is_simple(catalog.group("Z1"))


def test_coset_and_regular_actions():
    grp = catalog.group("S4")
    sub = maximal_subgroups(grp)[0].representative
    act = coset_action(grp, sub)
    assert act.points == grp.order // sub.order
    assert stabilizer(act, 0).order == sub.order
    reg = regular_action(catalog.group("Z6"))
    assert reg.points == 6 and reg.fixed_points() == []
    assert len(orbits(reg)) == 1


def test_primitivity():
    assert is_primitive(natural_action(catalog.group("S4")))
    assert not is_primitive(regular_action(catalog.group("Z4")))
    assert is_primitive(regular_action(catalog.group("Z5")))
    act = prim_action(catalog.group("A5"))
    assert act.component_sizes == (10, 6, 5)
    start = 0
    for size in act.component_sizes:
        piece = restrict_action(act, range(start, start + size))
        assert is_primitive(piece)
        start += size


def test_minimal_fpf():
    assert is_minimal_fpf(prim_action(catalog.group("A5")))
    assert not is_minimal_fpf(natural_action(catalog.group("S3")))   # A3 suffices
    assert is_minimal_fpf(natural_action(catalog.group("Z3")))


def test_action_homomorphism_check():
    grp = catalog.group("S3")
    with pytest.raises(ValueError):
        GroupAction(grp, 2, [Permutation((1, 0)), Permutation((1, 0))]).element_images
    sign = GroupAction(grp, 2, [Permutation((1, 0)), Permutation((0, 1))])
    assert sign.element_images.shape == (6, 2)


def test_group_file_roundtrip(tmp_path):
    grp = catalog.group("PSL27")
    text = format_group_file(grp)
    again = read_group_file(text)
    assert again.order == 168 and again.name == "PSL27"
    assert read_group_file("# comment\ndegree 3\ngen (1 2 3)  # cyclic\n").order == 3
    with pytest.raises(ValueError):
        read_group_file("gen (1 2)\n")
    path = tmp_path / "g.txt"
    path.write_text(text)
    assert catalog.group(str(path)).order == 168


# biactions ----------------------------------------------------------------------

SMALL = ["Z2:regular", "Z3:regular", "S3:natural", "S3:regular", "Z4:regular", "A4:natural",
         "Z2:natural", "S4:natural"]


def test_biaction_subquotient_random_instances():
    rng = np.random.default_rng(11)
    acts = {s: catalog.action(s) for s in SMALL}
    passed = 0
    for _ in range(50):
        g, h = rng.choice(SMALL, size=2)
        gact, hact = acts[g], acts[h]
        t = rng.integers(0, gact.points, size=hact.points)
        rep = biaction_subquotient(gact, hact, t)
        assert rep.passed, rep.failures
        assert rep.stab_g_orbit == rep.stab_g_t * rep.z_size
        assert rep.stab_h_orbit == rep.stab_h_t * rep.z_size
        passed += 1
    assert passed == 50


def test_biaction_rejects_bad_map():
    with pytest.raises(ValueError):
        biaction_subquotient(catalog.action("Z2:regular"), catalog.action("Z3:regular"), [0, 5, 0])
