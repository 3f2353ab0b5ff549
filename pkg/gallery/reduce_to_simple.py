"""
Reducing an action to a simple group
====================================

A fixed-point-free action either passes to a minimal fixed-point-free
subgroup or to a quotient acting on a fixed set, until a simple group is
left.  The steps are printed for a few small cases.
"""
from ppcon import catalog
from ppcon.perm import GroupAction, Permutation
from ppcon.pplab import reduce_to_simple

for spec in ["S3:natural", "Z6:regular", "S4:natural", "A5:prim"]:
    print(spec)
    print(reduce_to_simple(catalog.action(spec)).text())

# Z4 acting on two points through its quotient Z2
z4 = catalog.group("Z4")
print("Z4 on 2 points")
print(reduce_to_simple(GroupAction(z4, 2, [Permutation((1, 0))])).text())
