"""Tuffley poset of X-forests, its NNI graph, coatom-ordering search and edge products."""
from __future__ import annotations

from .edge_product import EdgeWeightVector, degenerate, lambda_T
from .forest import XForest, XTree, canonicalize, enumerate_trivalent, validate
from .nni import build_nni_graph, canonical_cycle_K, classify_cycle, find_critical_triplets, verify_context
from .poset import Poset, augment, build_tuffley, check_graded, check_thin
from .report import obstruction_report
from .shellability import condition_ii_feasible, rco_search, replay_certificate, valid_extension

__all__ = [
    "EdgeWeightVector",
    "Poset",
    "XForest",
    "XTree",
    "augment",
    "build_nni_graph",
    "build_tuffley",
    "canonical_cycle_K",
    "canonicalize",
    "check_graded",
    "check_thin",
    "classify_cycle",
    "condition_ii_feasible",
    "degenerate",
    "enumerate_trivalent",
    "find_critical_triplets",
    "lambda_T",
    "rco_search",
    "replay_certificate",
    "obstruction_report",
    "valid_extension",
    "validate",
    "verify_context",
]
