"""Finite permutation groups, structures of group actions, minor conditions and
polymorphism constructions."""

from .errors import BudgetExceeded
from .perm import (FiniteGroup, GroupAction, Permutation, is_simple, maximal_subgroups,
                   natural_action, prim_action, regular_action, subgroups_up_to_conjugacy)
from .structures import RelStructure, find_homomorphism, isomorphic, structure_of_action
from .conditions import (FiniteOperation, action_criterion, find_polymorphism, fs_spectrum,
                         make_condition, op_satisfies, parse_condition)
from .forge import pipeline
from .pplab import eval_pp, parse_pp, pp_power, reduce_to_simple, sn_indicator

__version__ = "0.1.0"
