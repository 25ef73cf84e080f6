"""Toolkit for the random graph process and its resilience properties:
hitting times, edge-deletion adversaries, constructive perfect matchings,
rotation-extension Hamiltonicity, exact small-instance oracles, and a
seeded Monte-Carlo experiment harness.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .graph import Graph
from .process import ProcessTrace, sample_gnp, sample_process, sample_sandwich

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "KERNEL_BACKEND",
    "ProcessTrace",
    "sample_gnp",
    "sample_process",
    "sample_sandwich",
    "__version__",
]
