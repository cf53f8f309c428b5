"""Bipartite unitaries, the channels they induce, and their classification.

Submodules
----------
matcore
    Bipartite operators, partial trace and transpose, spectral helpers.
channels
    Stinespring channels, Choi matrices and Kraus operators.
blocksvd
    Block-diagonal singular value decompositions.
classify
    Class membership tests and consistency-checked reports.
tangent
    Tangent-space and variety dimension counts.
generate
    Seeded constructors for labelled operators.
"""

from .matcore import DEFAULT_TOL, BipartiteOperator, Tolerances
from .verdicts import NO, UNKNOWN, YES, Value, Verdict

__version__ = "0.1.0"

__all__ = [
    "BipartiteOperator",
    "Tolerances",
    "DEFAULT_TOL",
    "Value",
    "Verdict",
    "YES",
    "NO",
    "UNKNOWN",
    "__version__",
]
