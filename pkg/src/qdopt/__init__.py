"""Exact first-order optimality analysis for quasidifferentiable programs.

Functions are given as expression strings built from affine terms, ``max``,
``min``, ``abs``, ``sin``, ``cos``, ``exp`` and ``pow``. Their
quasidifferentials at a rational anchor point are computed exactly as pairs of
rational polytopes. On top of those sit checks for constraint qualifications,
the linearized cone K, and certified KKT multipliers or refutations.
"""
__version__ = "0.1.0"

from .calculus import Quasidifferential, dir_deriv, quasidiff  # noqa: E402
from .problem import Problem, PolyhedralSet, load, load_bundled, loads, dumps  # noqa: E402
from .cq import Selection, check_cq, check_qd_mfcq, search_selection  # noqa: E402
from .optimality import (build_cone_k, check_cone_condition,  # noqa: E402
                         check_normal_cone_condition, refute_optimality)
from .analysis import analyze  # noqa: E402

__all__ = [
    "Quasidifferential", "dir_deriv", "quasidiff",
    "Problem", "PolyhedralSet", "load", "load_bundled", "loads", "dumps",
    "Selection", "check_cq", "check_qd_mfcq", "search_selection",
    "build_cone_k", "check_cone_condition", "check_normal_cone_condition", "refute_optimality",
    "analyze",
]
