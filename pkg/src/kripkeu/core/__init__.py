"""Core algorithms: posets, the universal model, downset algebras, formulas and the completion."""

from .completion import (
    CoFinite,
    Distance,
    Finite,
    FormulaDefined,
    ProfiniteApprox,
    cb_classify,
    count_k_extensions,
    distance,
    find_antichain,
    is_isolated,
    project,
    section,
    truncate,
)
from .config import Limits, get_limits, settings
from .errors import KripkeuError, ResourceLimitError
from .formulas import Formula, de_jongh, decide, eval_formula, format_formula, impl_depth, parse_formula
from .heyting import Element, classify_irreducible, heyting_binary, subalgebra_closure
from .models import FiniteKripkeModel, embed_reduced, reduce_model
from .poset import NodeSet, Poset
from .universal import UniversalModel, build_universal, universal

__all__ = [
    "CoFinite",
    "Distance",
    "Element",
    "Finite",
    "FiniteKripkeModel",
    "Formula",
    "FormulaDefined",
    "KripkeuError",
    "Limits",
    "NodeSet",
    "Poset",
    "ProfiniteApprox",
    "ResourceLimitError",
    "UniversalModel",
    "build_universal",
    "cb_classify",
    "classify_irreducible",
    "count_k_extensions",
    "de_jongh",
    "decide",
    "distance",
    "embed_reduced",
    "eval_formula",
    "find_antichain",
    "format_formula",
    "get_limits",
    "heyting_binary",
    "impl_depth",
    "is_isolated",
    "parse_formula",
    "project",
    "reduce_model",
    "section",
    "settings",
    "subalgebra_closure",
    "truncate",
    "universal",
]
