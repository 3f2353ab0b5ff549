"""
Where fully symmetric polymorphisms fail
========================================

S(G on prim G) has a fully symmetric polymorphism of arity k exactly when
k is not a sum of orbit sizes.  For A5 the sizes are 5, 6 and 10.
"""
from ppcon import catalog
from ppcon.conditions import find_polymorphism, fs_spectrum, make_condition, semigroup_members
from ppcon.structures import structure_of_action

for name in ["A5", "PSL27", "A6"]:
    spec = fs_spectrum(catalog.group(name), 25)
    print(f"{name:6s} sizes {sorted(spec.component_sizes)}  failing: {spec.describe()}")

# the spectrum is the numerical semigroup generated by the sizes
members = semigroup_members([5, 6, 10], 25)
print("semigroup <5,6,10> up to 25:", [k for k in range(1, 26) if members[k]])

# direct search agrees at small arity on the regular action of Z2
s = structure_of_action(catalog.action("Z2:prim"))
for k in range(1, 5):
    found = find_polymorphism(s, make_condition("fs", k)) is not None
    print(f"Z2 prim, fully symmetric of arity {k}: {'yes' if found else 'no'}")
