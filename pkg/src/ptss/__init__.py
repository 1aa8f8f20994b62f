"""Workbench for probabilistic transition system specifications."""

from .bisim import Partition, equivalent, naive_fixpoint, quotient, random_pts
from .derive import build_pts, derive_pts, is_complete, stable_model
from .formats import check_spec
from .formulas import fragment_of, parse_formula
from .lang import load_spec, parse_spec, parse_term, render
from .logic import distinguishing_formula, sat_dist, sat_state
from .probe import congruence_probe
from .pts import Pts, parse_pts
from .terms import FiniteDistribution, eval_dist

__all__ = [
    "FiniteDistribution", "Partition", "Pts", "build_pts", "check_spec", "congruence_probe", "derive_pts",
    "distinguishing_formula", "equivalent", "eval_dist", "fragment_of", "is_complete", "load_spec",
    "naive_fixpoint", "parse_formula", "parse_pts", "parse_spec", "parse_term", "quotient", "random_pts",
    "render", "sat_dist", "sat_state", "stable_model",
]
