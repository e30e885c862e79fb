"""MILP representation, LP export and solver backends."""

from .backends import CommandBackend, ScipyBackend, SolverError, make_backend
from .ir import Expr, ModelError, ModelIR, lsum

__all__ = ["CommandBackend", "ScipyBackend", "SolverError", "make_backend",
           "Expr", "ModelError", "ModelIR", "lsum"]
