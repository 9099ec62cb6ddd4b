"""Abstract mixed-integer linear program representation and solver backends.

The planning model builds a :class:`MilpProblem`; solving goes through a
pluggable backend chosen by the ``DBIO_SOLVER`` environment variable:

* ``highs`` (default) — scipy's HiGHS-based MILP solver.
* ``enum`` — exhaustive enumeration over binary assignments (<= 20 binaries),
  each reduced to an LP. Exists so the test suite never depends on the
  branch-and-bound path it is checking.

An optional export to the industry-standard LP text format is provided for
debugging.
"""

from __future__ import annotations

import itertools
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog, milp
from scipy.optimize import Bounds as _Bounds
from scipy.optimize import LinearConstraint as _LinCon

INF = math.inf

LE, EQ, GE = "<=", "=", ">="
_SENSES = (LE, EQ, GE)

FEASIBILITY_TOL = 1e-6
INTEGRALITY_TOL = 1e-6


class MilpError(RuntimeError):
    pass


class BackendUnavailableError(MilpError):
    """Requested solver backend cannot be used (missing or unsuitable)."""


@dataclass
class SolveOptions:
    mip_gap: float = 0.0
    time_limit: float = 3600.0
    threads: int = 0  # 0 = backend default; HiGHS via scipy ignores this

    def __post_init__(self):
        if self.mip_gap < 0:
            raise MilpError("mip_gap must be >= 0")
        if self.time_limit <= 0:
            raise MilpError("time_limit must be > 0")


OPTIMAL = "optimal"
FEASIBLE_GAP = "feasible-gap"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
TIME_LIMIT = "time-limit"


@dataclass
class SolveResult:
    status: str
    objective: float
    primal: np.ndarray | None
    achieved_gap: float = 0.0
    runtime: float = 0.0

    @property
    def has_solution(self):
        return self.status in (OPTIMAL, FEASIBLE_GAP)


@dataclass
class _Constraint:
    indices: np.ndarray
    coefs: np.ndarray
    sense: str
    rhs: float
    name: str


class MilpProblem:
    """Sparse minimize-only MILP: variables, linear constraints, objective.

    Construction is incremental; the problem is treated as immutable once
    handed to :func:`solve`.
    """

    def __init__(self, name="problem"):
        self.name = name
        self._var_names: list[str] = []
        self._lower: list[float] = []
        self._upper: list[float] = []
        self._binary: list[bool] = []
        self._constraints: list[_Constraint] = []
        self._obj_coefs: dict[int, float] = {}
        self.objective_constant = 0.0

    # -- variables ---------------------------------------------------------

    def add_variable(self, name, lower=0.0, upper=INF, binary=False) -> int:
        if lower > upper:
            raise MilpError(f"variable {name}: lower {lower} > upper {upper}")
        if binary and not (lower >= 0 and upper <= 1):
            raise MilpError(f"binary variable {name}: bounds must be within [0, 1]")
        self._var_names.append(name)
        self._lower.append(float(lower))
        self._upper.append(float(upper))
        self._binary.append(bool(binary))
        return len(self._var_names) - 1

    @property
    def n_variables(self):
        return len(self._var_names)

    @property
    def n_constraints(self):
        return len(self._constraints)

    @property
    def binary_indices(self):
        return [i for i, b in enumerate(self._binary) if b]

    def variable_name(self, idx):
        return self._var_names[idx]

    def bounds(self):
        return np.asarray(self._lower), np.asarray(self._upper)

    # -- constraints and objective -----------------------------------------

    def add_constraint(self, terms, sense, rhs, name=None) -> int:
        """Add ``sum(coef * var) sense rhs``; ``terms`` is [(var_index, coef)]."""
        if sense not in _SENSES:
            raise MilpError(f"unknown sense {sense!r}")
        idx = [t[0] for t in terms]
        coefs = [t[1] for t in terms]
        if len(set(idx)) != len(idx):
            raise MilpError(f"constraint {name or len(self._constraints)}: duplicate variable ids")
        for i, c in zip(idx, coefs):
            if not 0 <= i < self.n_variables:
                raise MilpError(f"constraint {name}: unknown variable id {i}")
            if not math.isfinite(c):
                raise MilpError(f"constraint {name}: non-finite coefficient on {self._var_names[i]}")
        if not math.isfinite(rhs):
            raise MilpError(f"constraint {name}: non-finite rhs")
        self._constraints.append(_Constraint(
            indices=np.asarray(idx, dtype=np.int64),
            coefs=np.asarray(coefs, dtype=float),
            sense=sense, rhs=float(rhs),
            name=name or f"c{len(self._constraints)}"))
        return len(self._constraints) - 1

    def set_objective(self, terms, constant=0.0):
        self._obj_coefs = {}
        for i, c in terms:
            if not 0 <= i < self.n_variables:
                raise MilpError(f"objective: unknown variable id {i}")
            self._obj_coefs[i] = self._obj_coefs.get(i, 0.0) + float(c)
        self.objective_constant = float(constant)

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.n_variables)
        for i, v in self._obj_coefs.items():
            c[i] = v
        return c

    def constraint_matrix(self):
        """(A, lb, ub) row-bound form of all constraints."""
        rows, cols, data = [], [], []
        lb = np.empty(self.n_constraints)
        ub = np.empty(self.n_constraints)
        for r, con in enumerate(self._constraints):
            rows.extend([r] * len(con.indices))
            cols.extend(con.indices.tolist())
            data.extend(con.coefs.tolist())
            if con.sense == LE:
                lb[r], ub[r] = -INF, con.rhs
            elif con.sense == GE:
                lb[r], ub[r] = con.rhs, INF
            else:
                lb[r], ub[r] = con.rhs, con.rhs
        A = sp.csr_matrix((data, (rows, cols)),
                          shape=(self.n_constraints, self.n_variables))
        return A, lb, ub

    # -- evaluation and export ---------------------------------------------

    def evaluate(self, primal):
        """Per-constraint residuals and objective at a full assignment.

        Equality residual is |lhs - rhs|; inequality residual is the
        violation magnitude (0 when satisfied).
        """
        primal = np.asarray(primal, dtype=float)
        if primal.shape != (self.n_variables,):
            raise MilpError(
                f"assignment covers {primal.size} variables, expected {self.n_variables}")
        residuals = np.empty(self.n_constraints)
        for r, con in enumerate(self._constraints):
            lhs = float(con.coefs @ primal[con.indices])
            if con.sense == EQ:
                residuals[r] = abs(lhs - con.rhs)
            elif con.sense == LE:
                residuals[r] = max(0.0, lhs - con.rhs)
            else:
                residuals[r] = max(0.0, con.rhs - lhs)
        obj = float(self.objective_vector() @ primal) + self.objective_constant
        return residuals, obj

    def to_lp_string(self) -> str:
        """Render in CPLEX LP text format."""

        def term(c, name, first):
            mag = f"{abs(c):.17g}" + (f" {name}" if name else "")
            if first:
                return ("- " if c < 0 else "") + mag
            return ("- " if c < 0 else "+ ") + mag

        lines = [f"\\ {self.name}", "Minimize", " obj:"]
        parts = []
        first = True
        for i in sorted(self._obj_coefs):
            c = self._obj_coefs[i]
            if c == 0:
                continue
            parts.append(term(c, self._var_names[i], first))
            first = False
        if self.objective_constant:
            parts.append(term(self.objective_constant, "", first).rstrip())
        lines[-1] += " " + (" ".join(parts) if parts else "0")
        lines.append("Subject To")
        for con in self._constraints:
            body = []
            first = True
            for i, c in zip(con.indices, con.coefs):
                body.append(term(c, self._var_names[i], first))
                first = False
            op = {LE: "<=", GE: ">=", EQ: "="}[con.sense]
            lines.append(f" {con.name}: {' '.join(body) or '0'} {op} {con.rhs:.17g}")
        lines.append("Bounds")
        for i, name in enumerate(self._var_names):
            lo, hi = self._lower[i], self._upper[i]
            lo_s = "-inf" if lo == -INF else f"{lo:.17g}"
            hi_s = "+inf" if hi == INF else f"{hi:.17g}"
            lines.append(f" {lo_s} <= {name} <= {hi_s}")
        bins = [self._var_names[i] for i in self.binary_indices]
        if bins:
            lines.append("Binaries")
            for i in range(0, len(bins), 8):
                lines.append(" " + " ".join(bins[i:i + 8]))
        lines.append("End")
        return "\n".join(lines) + "\n"

    def write_lp(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_lp_string())


# -- backends ----------------------------------------------------------------


def _highs_solve(problem: MilpProblem, opts: SolveOptions) -> SolveResult:
    lower, upper = problem.bounds()
    c = problem.objective_vector()
    integrality = np.zeros(problem.n_variables, dtype=int)
    integrality[problem.binary_indices] = 1
    constraints = []
    if problem.n_constraints:
        A, lb, ub = problem.constraint_matrix()
        constraints.append(_LinCon(A, lb, ub))
    t0 = time.perf_counter()
    res = milp(c=c, constraints=constraints,
               bounds=_Bounds(lower, upper),
               integrality=integrality,
               options={"mip_rel_gap": opts.mip_gap,
                        "time_limit": opts.time_limit,
                        "presolve": True, "disp": False})
    runtime = time.perf_counter() - t0
    gap = float(getattr(res, "mip_gap", 0.0) or 0.0)
    if res.status == 0:
        status = OPTIMAL if gap <= max(opts.mip_gap, 1e-9) else FEASIBLE_GAP
    elif res.status == 1 and res.x is not None:
        status = TIME_LIMIT
    elif res.status == 2:
        status = INFEASIBLE
    elif res.status == 3:
        status = UNBOUNDED
    else:
        raise MilpError(f"HiGHS backend failed: {res.message}")
    primal = np.asarray(res.x) if res.x is not None else None
    objective = (float(res.fun) + problem.objective_constant) if res.fun is not None else math.nan
    return SolveResult(status=status, objective=objective, primal=primal,
                       achieved_gap=gap, runtime=runtime)


def _enum_solve(problem: MilpProblem, opts: SolveOptions) -> SolveResult:
    """Exhaustive enumeration over binary assignments; LP per assignment."""
    bin_idx = problem.binary_indices
    if len(bin_idx) > 20:
        raise BackendUnavailableError(
            f"enumeration backend limited to 20 binaries, problem has {len(bin_idx)}")
    lower, upper = problem.bounds()
    c = problem.objective_vector()
    A, lb, ub = problem.constraint_matrix()
    A_ub = sp.vstack([A, -A]).tocsr()
    b_ub_base = np.concatenate([ub, -lb])
    finite = np.isfinite(b_ub_base)
    A_ub = A_ub[finite]
    b_ub_base = b_ub_base[finite]

    t0 = time.perf_counter()
    best = None
    any_feasible = False
    for combo in itertools.product((0.0, 1.0), repeat=len(bin_idx)):
        lo = lower.copy()
        hi = upper.copy()
        skip = False
        for i, v in zip(bin_idx, combo):
            if v < lo[i] - 1e-12 or v > hi[i] + 1e-12:
                skip = True
                break
            lo[i] = hi[i] = v
        if skip:
            continue
        res = linprog(c, A_ub=A_ub, b_ub=b_ub_base,
                      bounds=np.column_stack([lo, hi]), method="highs")
        if res.status == 3:
            return SolveResult(status=UNBOUNDED, objective=-INF, primal=None,
                               runtime=time.perf_counter() - t0)
        if res.status != 0:
            continue
        any_feasible = True
        if best is None or res.fun < best.fun:
            best = res
    runtime = time.perf_counter() - t0
    if not any_feasible:
        return SolveResult(status=INFEASIBLE, objective=math.nan, primal=None,
                           runtime=runtime)
    return SolveResult(status=OPTIMAL,
                       objective=float(best.fun) + problem.objective_constant,
                       primal=np.asarray(best.x), achieved_gap=0.0, runtime=runtime)


_BACKENDS = {"highs": _highs_solve, "enum": _enum_solve}


def default_backend() -> str:
    return os.environ.get("DBIO_SOLVER", "highs").lower()


def solve(problem: MilpProblem, opts: SolveOptions | None = None,
          backend: str | None = None) -> SolveResult:
    """Solve a MILP with the selected backend.

    Non-optimal statuses are reported in the result, never silently dropped;
    an unknown backend name raises :class:`BackendUnavailableError`.
    """
    opts = opts or SolveOptions()
    name = (backend or default_backend()).lower()
    if name not in _BACKENDS:
        raise BackendUnavailableError(
            f"unknown solver backend {name!r}; available: {sorted(_BACKENDS)}")
    return _BACKENDS[name](problem, opts)


def evaluate(problem: MilpProblem, primal):
    """Module-level alias for :meth:`MilpProblem.evaluate`."""
    return problem.evaluate(primal)
