"""Problem and solution containers for the LP/MILP solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SENSES = ("<=", "=", ">=")


class ProblemError(ValueError):
    """Raised when a problem definition is malformed."""


@dataclass(frozen=True)
class Variable:
    name: str
    lower: float = 0.0
    upper: float = math.inf
    is_integer: bool = False


@dataclass(frozen=True)
class Row:
    """One sparse constraint row: sum(coeffs[j] * x[j]) <sense> rhs."""

    coeffs: dict[int, float]
    sense: str
    rhs: float
    name: str = ""


@dataclass
class MilpProblem:
    """Minimization problem over bounded variables with sparse rows."""

    variables: list[Variable]
    objective: dict[int, float]
    rows: list[Row]

    def var_index(self, name: str) -> int:
        try:
            return self._index[name]
        except AttributeError:
            object.__setattr__(
                self, "_index", {v.name: j for j, v in enumerate(self.variables)}
            )
            return self._index[name]

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def integer_indices(self) -> list[int]:
        return [j for j, v in enumerate(self.variables) if v.is_integer]

    def validate(self) -> None:
        """Raise ProblemError on structural defects (NaNs, bad bounds, bad senses)."""
        names = set()
        for j, v in enumerate(self.variables):
            if v.name in names:
                raise ProblemError(f"duplicate variable name {v.name!r}")
            names.add(v.name)
            if math.isnan(v.lower) or math.isnan(v.upper):
                raise ProblemError(f"variable {v.name!r} has NaN bound")
            if v.lower > v.upper:
                raise ProblemError(
                    f"variable {v.name!r} has lower {v.lower} > upper {v.upper}"
                )
            if v.is_integer and not (
                math.isfinite(v.lower) and math.isfinite(v.upper)
            ):
                raise ProblemError(f"integer variable {v.name!r} must have finite bounds")
        for j, c in self.objective.items():
            if not 0 <= j < self.n_vars:
                raise ProblemError(f"objective references unknown variable index {j}")
            if not math.isfinite(c):
                raise ProblemError(f"objective coefficient for index {j} is not finite")
        for i, row in enumerate(self.rows):
            if row.sense not in SENSES:
                raise ProblemError(f"row {i} ({row.name!r}) has bad sense {row.sense!r}")
            if math.isnan(row.rhs):
                raise ProblemError(f"row {i} ({row.name!r}) has NaN rhs")
            for j, c in row.coeffs.items():
                if not 0 <= j < self.n_vars:
                    raise ProblemError(
                        f"row {i} ({row.name!r}) references unknown variable index {j}"
                    )
                if not math.isfinite(c):
                    raise ProblemError(f"row {i} ({row.name!r}) has non-finite coefficient")


@dataclass
class MilpSolution:
    """Solver outcome; `values` is aligned with MilpProblem.variables."""

    status: str  # OPTIMAL | INFEASIBLE | UNBOUNDED | ITERATION_LIMIT
    values: np.ndarray | None
    objective: float
    gap: float = 0.0
    node_count: int = 0
    iterations: int = 0
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    basis: np.ndarray | None = None
    certificate: dict | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status == "OPTIMAL"


class ProblemBuilder:
    """Incremental construction of a MilpProblem with named variables."""

    def __init__(self) -> None:
        self._vars: list[Variable] = []
        self._obj: dict[int, float] = {}
        self._rows: list[Row] = []
        self._by_name: dict[str, int] = {}

    def add_var(
        self,
        name: str,
        lower: float = 0.0,
        upper: float = math.inf,
        integer: bool = False,
        obj: float = 0.0,
    ) -> int:
        if name in self._by_name:
            raise ProblemError(f"variable {name!r} already defined")
        j = len(self._vars)
        self._vars.append(Variable(name, float(lower), float(upper), integer))
        self._by_name[name] = j
        if obj:
            self._obj[j] = float(obj)
        return j

    def add_binary(self, name: str, obj: float = 0.0) -> int:
        return self.add_var(name, 0.0, 1.0, integer=True, obj=obj)

    def add_row(self, coeffs: dict[int, float], sense: str, rhs: float, name: str = "") -> int:
        clean = {j: float(c) for j, c in coeffs.items() if c != 0.0}
        self._rows.append(Row(clean, sense, float(rhs), name))
        return len(self._rows) - 1

    def add_obj(self, index: int, coeff: float) -> None:
        self._obj[index] = self._obj.get(index, 0.0) + float(coeff)

    def index(self, name: str) -> int:
        return self._by_name[name]

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def build(self) -> MilpProblem:
        problem = MilpProblem(list(self._vars), dict(self._obj), list(self._rows))
        problem.validate()
        return problem


def _fmt(x: float) -> str:
    return repr(float(x))


def write_lp(problem: MilpProblem, path) -> None:
    """Dump the problem in LP text format (minimization)."""
    lines = ["Minimize", " obj:"]
    terms = []
    for j in sorted(problem.objective):
        c = problem.objective[j]
        terms.append(f" {'+' if c >= 0 else '-'} {_fmt(abs(c))} {problem.variables[j].name}")
    lines.extend(terms or [" 0 " + problem.variables[0].name] if problem.variables else [])
    lines.append("Subject To")
    op = {"<=": "<=", ">=": ">=", "=": "="}
    for i, row in enumerate(problem.rows):
        name = row.name or f"r{i}"
        body = " ".join(
            f"{'+' if row.coeffs[j] >= 0 else '-'} {_fmt(abs(row.coeffs[j]))} "
            f"{problem.variables[j].name}"
            for j in sorted(row.coeffs)
        )
        lines.append(f" {name}: {body or '0 ' + problem.variables[0].name} {op[row.sense]} {_fmt(row.rhs)}")
    lines.append("Bounds")
    for v in problem.variables:
        lo = "-inf" if v.lower == -math.inf else _fmt(v.lower)
        hi = "+inf" if v.upper == math.inf else _fmt(v.upper)
        lines.append(f" {lo} <= {v.name} <= {hi}")
    integers = [v.name for v in problem.variables if v.is_integer]
    if integers:
        lines.append("General")
        lines.append(" " + " ".join(integers))
    lines.append("End")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
