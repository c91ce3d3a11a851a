"""Expression language for possibly nonlinear differential operators on jets."""

from .evaluate import (DomainError, Issue, JetEnv, Validation, eval_operator, evaluate, is_linear,
                       jet_degrees, validate, wirtinger_grad)
from .hierarchy import (Hierarchy, HierarchyError, lift, lifted_hierarchy, load_hierarchy,
                        output_indices, save_hierarchy)
from .nodes import FUNCTIONS, BinOp, Call, Coord, ImagUnit, JetVar, Neg, Node, Num, Pow, to_text, walk
from .parser import ParseError, parse_operator
from .presets import PRESETS, cubic_nls, doebner_goldin, linear_schrodinger, preset

__all__ = [
    "BinOp", "Call", "Coord", "DomainError", "FUNCTIONS", "Hierarchy", "HierarchyError", "ImagUnit",
    "Issue", "JetEnv", "JetVar", "Neg", "Node", "Num", "PRESETS", "ParseError", "Pow", "Validation",
    "cubic_nls", "doebner_goldin", "eval_operator", "evaluate", "is_linear", "jet_degrees", "lift",
    "lifted_hierarchy", "linear_schrodinger", "load_hierarchy", "output_indices", "parse_operator",
    "preset", "save_hierarchy", "to_text", "validate", "walk", "wirtinger_grad",
]
