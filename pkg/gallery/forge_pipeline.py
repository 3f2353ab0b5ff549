"""
From majority and Maltsev to total symmetry
===========================================

Starting from the boolean majority and x+y+z, the forge builds generalized
pairing terms of growing arity, symmetrizes them, extracts compatible
generalized minorities and finally totally symmetric terms.  Every step is
checked exhaustively on {0,1}.
"""
from ppcon.forge import BOOLEAN_MAJORITY, XOR3, build_gp, check_gp, pipeline, tabulate

trail = []
p7 = build_gp(BOOLEAN_MAJORITY, XOR3, 7, trail=trail)
print("arities visited:", [m for m, _ in trail])
print("GP(7,7) holds:", check_gp(p7, 7, 7))
print("table size of the 7-ary term:", tabulate(p7).size)

report = pipeline(BOOLEAN_MAJORITY, XOR3, n_max=5)
print(report.text())

ts3 = tabulate(report.terms["ts3"])
print("ts3 truth table:", ts3.tolist())
