"""
T3, and the fixed-point criterion
=================================

T3 is the strict order on three elements.  It has totally symmetric
polymorphisms (the minimum) but no quasi Maltsev one.  For actions, the
condition coming from H on Y holds in Pol(S(G on X)) iff every orbit
stabilizer of a map Y -> X fixes a point.
"""
from ppcon import catalog
from ppcon.conditions import action_criterion, criterion_witness, find_polymorphism, make_condition
from ppcon.structures import T3

print("T3 quasi Maltsev:", find_polymorphism(T3, make_condition("maltsev")))
for n in range(1, 5):
    f = find_polymorphism(T3, make_condition("ts", n))["f"]
    print(f"ts({n}) table:", f.table.tolist())

g = catalog.action("A5:prim")
for h in ["Z2:regular", "Z3:regular", "Z5:regular", "S5:natural"]:
    print(f"A5 prim vs {h}:", action_criterion(g, catalog.action(h)))
print("witness map for S5:", criterion_witness(g, catalog.action("S5:natural")))
