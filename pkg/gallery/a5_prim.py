"""
The prim action of A5
=====================

Conjugation on the maximal subgroups of A5 splits into three orbits.  We
build the action, list the orbits and compare each one with the printed
two-generator structure.  A DOT file of the f,g-reduct is written next to
the working directory.
"""
from pathlib import Path

from ppcon import catalog
from ppcon.dot import export_dot
from ppcon.perm import maximal_subgroups, prim_action
from ppcon.structures import connected_components, find_isomorphism, structure_of_action

a5 = catalog.group("A5")
for c in maximal_subgroups(a5):
    print(f"maximal class: order {c.order}, {c.class_size} conjugates")

act = prim_action(a5)
print("points:", act.points, "component sizes:", act.component_sizes)

ours = structure_of_action(act)
printed = structure_of_action(catalog.reference_prim_action("A5"))

# sizes 5, 6 and 10 are distinct, so components pair up by size
theirs = {len(c): c for c in connected_components(printed)}
for comp in connected_components(ours):
    iso = find_isomorphism(ours.induced(comp), printed.induced(theirs[len(comp)]))
    print(f"component of size {len(comp)}: isomorphic to the printed one: {iso is not None}")

out = export_dot(ours, Path("a5_prim.dot"), name="A5prim")
print("wrote", out.name)
