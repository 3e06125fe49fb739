"""Concrete DC problem instances."""

from .capped import CappedL1Problem
from .ksparse import KsparseProblem, vector_k_norm
from .kmedians import KmediansProblem
from .toy import Toy1dProblem

__all__ = [
    "CappedL1Problem",
    "KsparseProblem",
    "KmediansProblem",
    "Toy1dProblem",
    "vector_k_norm",
]
