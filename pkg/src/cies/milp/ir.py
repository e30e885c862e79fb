"""Solver-agnostic MILP representation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from scipy import sparse

INF = math.inf

Number = Union[int, float]


class ModelError(ValueError):
    pass


class Expr:
    """Sparse linear expression ``sum(coef * x[i]) + const`` over variable indices."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: Optional[Dict[int, float]] = None, const: float = 0.0):
        self.terms = dict(terms) if terms else {}
        self.const = float(const)

    @classmethod
    def var(cls, idx: int, coef: float = 1.0) -> "Expr":
        return cls({idx: coef})

    def copy(self) -> "Expr":
        return Expr(self.terms, self.const)

    def add(self, other, scale: float = 1.0) -> "Expr":
        """In-place ``self += scale * other``."""
        if isinstance(other, Expr):
            for k, v in other.terms.items():
                self.terms[k] = self.terms.get(k, 0.0) + scale * v
            self.const += scale * other.const
        else:
            self.const += scale * float(other)
        return self

    def __add__(self, other):
        return self.copy().add(other)

    __radd__ = __add__

    def __sub__(self, other):
        return self.copy().add(other, -1.0)

    def __rsub__(self, other):
        return (-1.0 * self).add(other)

    def __neg__(self):
        return -1.0 * self

    def __mul__(self, k: Number):
        if isinstance(k, Expr):
            raise ModelError("products of expressions are not linear")
        return Expr({i: c * k for i, c in self.terms.items()}, self.const * k)

    __rmul__ = __mul__

    def value(self, x: np.ndarray) -> float:
        return self.const + sum(c * x[i] for i, c in self.terms.items())

    def __repr__(self):
        return f"Expr({self.terms}, {self.const})"


def lsum(items: Iterable) -> Expr:
    out = Expr()
    for it in items:
        out.add(it)
    return out


@dataclass
class Variable:
    name: str
    lb: float = 0.0
    ub: float = INF
    binary: bool = False


@dataclass
class Constraint:
    name: str
    terms: Dict[int, float]
    sense: str  # "<=", "=", ">="
    rhs: float


@dataclass
class ModelIR:
    name: str = "cies"
    variables: List[Variable] = field(default_factory=list)
    constraints: List[Constraint] = field(default_factory=list)
    objective: Expr = field(default_factory=Expr)
    _index: Dict[str, int] = field(default_factory=dict, repr=False)
    _row_names: set = field(default_factory=set, repr=False)

    # construction -----------------------------------------------------------
    def add_var(self, name: str, lb: float = 0.0, ub: float = INF, binary: bool = False) -> Expr:
        if name in self._index:
            raise ModelError(f"duplicate variable name {name!r}")
        if binary:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        if lb > ub:
            raise ModelError(f"variable {name!r} has lb {lb} > ub {ub}")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, float(lb), float(ub), binary))
        return Expr.var(self._index[name])

    def add_constraint(self, name: str, lhs: Expr, sense: str, rhs: Union[Number, Expr] = 0.0) -> None:
        if sense not in ("<=", "=", ">="):
            raise ModelError(f"unknown sense {sense!r}")
        if name in self._row_names:
            raise ModelError(f"duplicate constraint name {name!r}")
        expr = lhs - rhs if isinstance(rhs, Expr) else lhs - float(rhs)
        terms = {i: c for i, c in expr.terms.items() if c != 0.0}
        for c in terms.values():
            if not math.isfinite(c):
                raise ModelError(f"non-finite coefficient in {name!r}")
        self._row_names.add(name)
        self.constraints.append(Constraint(name, terms, sense, -expr.const))

    def minimize(self, expr: Expr) -> None:
        self.objective = expr.copy()

    # lookup -------------------------------------------------------------------
    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def has_var(self, name: str) -> bool:
        return name in self._index

    def v(self, name: str) -> Expr:
        return Expr.var(self.index(name))

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_binaries(self) -> int:
        return sum(v.binary for v in self.variables)

    def names(self) -> List[str]:
        return [v.name for v in self.variables]

    def validate(self) -> None:
        n = self.n_vars
        for row in self.constraints:
            for i in row.terms:
                if not 0 <= i < n:
                    raise ModelError(f"constraint {row.name!r} references unknown variable {i}")
        for v in self.variables:
            if v.lb > v.ub:
                raise ModelError(f"variable {v.name!r} has inverted bounds")
        for i in self.objective.terms:
            if not 0 <= i < n:
                raise ModelError(f"objective references unknown variable {i}")

    # numeric views -----------------------------------------------------------
    def to_arrays(self):
        """``(c, A, row_lo, row_hi, lb, ub, integrality)`` for array-based solvers."""
        n = self.n_vars
        c = np.zeros(n)
        for i, k in self.objective.terms.items():
            c[i] += k
        rows, cols, vals = [], [], []
        lo = np.empty(len(self.constraints))
        hi = np.empty(len(self.constraints))
        for r, con in enumerate(self.constraints):
            for i, k in con.terms.items():
                rows.append(r)
                cols.append(i)
                vals.append(k)
            lo[r] = con.rhs if con.sense in (">=", "=") else -INF
            hi[r] = con.rhs if con.sense in ("<=", "=") else INF
        a = sparse.csr_matrix((vals, (rows, cols)), shape=(len(self.constraints), n))
        lb = np.array([v.lb for v in self.variables])
        ub = np.array([v.ub for v in self.variables])
        integ = np.array([1 if v.binary else 0 for v in self.variables])
        return c, a, lo, hi, lb, ub, integ

    def objective_value(self, x: np.ndarray) -> float:
        return self.objective.value(x)

    def row_residuals(self, x: np.ndarray) -> List[Tuple[str, float]]:
        """Constraint violations (name, amount) of a point, largest first."""
        out = []
        for con in self.constraints:
            lhs = sum(k * x[i] for i, k in con.terms.items())
            if con.sense == "<=":
                viol = lhs - con.rhs
            elif con.sense == ">=":
                viol = con.rhs - lhs
            else:
                viol = abs(lhs - con.rhs)
            if viol > 0:
                out.append((con.name, viol))
        return sorted(out, key=lambda p: -p[1])
