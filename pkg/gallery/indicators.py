"""
pp-formulas and indicator structures
====================================

A pp-formula is evaluated by hash joins.  An indicator structure lives on
the polymorphisms of a structure, with an edge from f to each of its minors
under an adjacent transposition.  It has a fixed point exactly when there is
a fully symmetric polymorphism.
"""
from ppcon.errors import BudgetExceeded
from ppcon.pplab import eval_pp, has_fixed_point, parse_pp, sn_indicator
from ppcon.structures import C1, cycle

c5 = cycle(5)
two_steps = parse_pp("exists z1: E(x1,z1) & E(z1,x2)")
print("pairs at distance two on C5:", sorted(eval_pp(c5, two_steps)))

for name, s in [("C1", C1), ("C2", cycle(2)), ("C3", cycle(3))]:
    for n in (2, 3):
        try:
            ind = sn_indicator(s, n)
        except BudgetExceeded as exc:
            print(f"{name} arity {n}: {exc}")
            continue
        print(f"{name} arity {n}: {ind.domain_size} polymorphisms, fixed point: {has_fixed_point(ind)}")
