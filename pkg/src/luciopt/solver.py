"""Anytime 0-1 optimisation of scheduling models.

Three interchangeable backends share one contract (``solve`` below):

* ``cpsat``  - OR-tools CP-SAT, single worker, seeded; the default;
* ``highs``  - scipy's HiGHS MILP, driven by objective cut-off rounds;
* ``bnb``    - a small pure-Python branch and bound over the primary
  variables, meant for tiny models and as an independent oracle.

Whatever the backend, a hint is treated as the starting incumbent and is
returned unchanged unless something strictly better is found.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .ilpmodel import LABELS, IlpModel

STATUSES = ("optimal", "feasible", "infeasible", "unknown")


@dataclass(frozen=True)
class SolveParams:
    time_limit: float = 300.0
    seed: int = 0
    hints: tuple | list | None = None
    emit_trace: bool = False
    work_limit: float | None = None  # deterministic budget (backend units)
    backend: str = "auto"

    def __post_init__(self):
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")
        if self.backend not in ("auto", "cpsat", "highs", "bnb"):
            raise ValueError(f"unknown backend {self.backend!r}")


@dataclass
class Solution:
    assignment: list | None
    objective: int | None  # scaled integer objective, constant included
    bound: int | None
    status: str
    trace: list = field(default_factory=list)  # (elapsed_s, incumbent, bound)
    backend: str = ""
    witness: tuple = ()  # constraint families jointly infeasible

    @property
    def feasible(self) -> bool:
        return self.status in ("optimal", "feasible")

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["elapsed_s", "incumbent", "bound"])
        for row in self.trace:
            w.writerow([f"{row[0]:.3f}", "" if row[1] is None else row[1],
                        "" if row[2] is None else row[2]])
        return buf.getvalue()


def have_cpsat() -> bool:
    try:
        import ortools.sat.python.cp_model  # noqa: F401
    except ImportError:
        return False
    return True


def _backend(params: SolveParams) -> str:
    if params.backend != "auto":
        return params.backend
    return "cpsat" if have_cpsat() else "highs"


def _check_hint(model: IlpModel, hint) -> list | None:
    if hint is None:
        return None
    x = [int(v) for v in hint]
    if len(x) != len(model.vars):
        raise ValueError(f"hint has {len(x)} values, model has {len(model.vars)} variables")
    bad = model.violations(x)
    if bad:
        raise ValueError(f"hint is infeasible: {bad[:5]}")
    return x


def solve(model: IlpModel, params: SolveParams = SolveParams()) -> Solution:
    """Minimise the model objective; structural models are solved for feasibility.

    The result never has a worse objective than the hint.  ``bound`` is a
    proven lower bound.  With ``work_limit`` set the run is reproducible
    bit for bit apart from the elapsed column of the trace.
    """
    hint = _check_hint(model, params.hints)
    backend = _backend(params)
    run = {"cpsat": _solve_cpsat, "highs": _solve_highs, "bnb": _solve_bnb}[backend]
    sol = run(model, params, hint)
    sol.backend = backend
    if hint is not None:
        hv = model.objective_value(hint)
        if sol.assignment is None or sol.objective >= hv:
            # keep the hint on ties so a good seed survives unchanged
            proven = sol.status == "optimal" or (sol.bound is not None and sol.bound >= hv)
            bound = hv if proven else sol.bound
            sol = Solution(hint, hv, bound, "optimal" if proven else "feasible",
                           sol.trace, backend)
    if sol.assignment is not None:
        assert model.is_feasible(sol.assignment), "solver returned an infeasible assignment"
        assert sol.bound is None or sol.bound <= sol.objective
    sol.trace = _monotone(sol.trace) if params.emit_trace else []
    return sol


def _monotone(trace) -> list:
    """Best-so-far incumbent and bound along a raw trace."""
    out = []
    inc = bnd = None
    for el, i, b in trace:
        if i is not None:
            inc = i if inc is None else min(inc, i)
        if b is not None:
            bnd = b if bnd is None else max(bnd, b)
        if inc is not None and bnd is not None:
            bnd = min(bnd, inc)
        out.append((el, inc, bnd))
    return out


def feasibility(model: IlpModel, params: SolveParams = SolveParams()) -> Solution:
    """Satisfiability of the model's structural constraints, objective ignored."""
    from .ilpmodel import build_model

    if model.objective is not None:
        model = build_model(model.instance, model.T, None, model.topology)
    sol = solve(model, SolveParams(params.time_limit, params.seed, None,
                                   params.emit_trace, params.work_limit, params.backend))
    if sol.feasible:
        sol.status = "feasible"
    return sol


# --- CP-SAT -----------------------------------------------------------------------

def _cp_build(model: IlpModel, families: bool):
    from ortools.sat.python import cp_model

    m = cp_model.CpModel()
    xs = [m.NewIntVar(0, v.ub, v.name) for v in model.vars]
    fam = {lab: m.NewBoolVar(f"use_{lab}") for lab in LABELS} if families else {}
    for c in model.constraints:
        expr = sum(a * xs[v] for v, a in c.terms)
        if c.sense == "<=":
            ct = m.Add(expr <= c.rhs)
        elif c.sense == ">=":
            ct = m.Add(expr >= c.rhs)
        else:
            ct = m.Add(expr == c.rhs)
        if families:
            ct.OnlyEnforceIf(fam[c.label])
    if families:
        m.AddAssumptions(list(fam.values()))
    return m, xs, fam


def _cp_solver(params: SolveParams, optimize: bool = True):
    from ortools.sat.python import cp_model

    s = cp_model.CpSolver()
    s.parameters.num_workers = 1
    s.parameters.random_seed = int(params.seed)
    # the LP relaxation pays off for bounds only; pure satisfiability is
    # an order of magnitude faster without it
    s.parameters.linearization_level = 2 if optimize else 1
    s.parameters.max_time_in_seconds = float(params.time_limit)
    if params.work_limit is not None:
        s.parameters.max_deterministic_time = float(params.work_limit)
    return s


def _solve_cpsat(model: IlpModel, params: SolveParams, hint) -> Solution:
    from ortools.sat.python import cp_model

    m, xs, _ = _cp_build(model, families=False)
    has_obj = bool(model.obj)
    if has_obj:
        expr = sum(c * xs[v] for v, c in model.obj.items())
        m.Minimize(expr)
    if hint is not None:
        for v, val in enumerate(hint):
            m.AddHint(xs[v], val)
        if has_obj:
            m.Add(expr <= model.objective_value(hint) - model.obj_const)
    s = _cp_solver(params, has_obj)

    trace = []
    const = model.obj_const
    t0 = time.perf_counter()
    if hint is not None:
        trace.append((0.0, model.objective_value(hint), None))

    class _Cb(cp_model.CpSolverSolutionCallback):
        def on_solution_callback(self):
            if has_obj:
                trace.append((time.perf_counter() - t0, int(round(self.ObjectiveValue())) + const,
                              int(np.ceil(self.BestObjectiveBound() - 1e-9)) + const))

    name = s.StatusName(s.Solve(m, _Cb()))
    if name in ("OPTIMAL", "FEASIBLE"):
        x = [int(s.Value(v)) for v in xs]
        obj = model.objective_value(x)
        if name == "OPTIMAL":
            bound = obj
        else:
            bound = min(obj, int(np.ceil(s.BestObjectiveBound() - 1e-9)) + const) if has_obj else None
        trace.append((time.perf_counter() - t0, obj, bound))
        return Solution(x, obj, bound, name.lower(), trace)
    if name == "INFEASIBLE":
        return Solution(None, None, None, "infeasible", trace, witness=_cp_witness(model, params))
    return Solution(None, None, None, "unknown", trace)


def _cp_witness(model: IlpModel, params: SolveParams) -> tuple:
    """Constraint families that are already infeasible together."""
    m, _, fam = _cp_build(model, families=True)
    s = _cp_solver(params, optimize=False)
    if s.StatusName(s.Solve(m)) != "INFEASIBLE":
        return ()
    core = set(s.SufficientAssumptionsForInfeasibility())
    return tuple(lab for lab in LABELS if fam[lab].Index() in core)


# --- HiGHS ------------------------------------------------------------------------

def to_arrays(model: IlpModel):
    """(c, A, lo, hi, ub) of the model in dense-vector / CSR form."""
    from scipy.sparse import coo_matrix

    n = len(model.vars)
    rows, cols, vals, lo, hi = [], [], [], [], []
    for k, c in enumerate(model.constraints):
        for v, a in c.terms:
            rows.append(k)
            cols.append(v)
            vals.append(a)
        lo.append(-np.inf if c.sense == "<=" else c.rhs)
        hi.append(np.inf if c.sense == ">=" else c.rhs)
    A = coo_matrix((vals, (rows, cols)), shape=(len(model.constraints), n)).tocsr()
    cvec = np.zeros(n)
    for v, c in model.obj.items():
        cvec[v] = c
    ub = np.array([v.ub for v in model.vars], dtype=float)
    return cvec, A, np.array(lo, float), np.array(hi, float), ub


def _solve_highs(model: IlpModel, params: SolveParams, hint) -> Solution:
    from scipy.optimize import Bounds, milp
    from scipy.optimize import LinearConstraint as Rows

    cvec, A, lo, hi, ub = to_arrays(model)
    const = model.obj_const
    t0 = time.perf_counter()
    inc = hint
    inc_val = model.objective_value(hint) if hint is not None else None
    trace = [(0.0, inc_val, None)] if hint is not None else []
    bound = None
    slice_nodes = int(params.work_limit) if params.work_limit is not None else None
    while True:
        left = params.time_limit - (time.perf_counter() - t0)
        if left <= 0:
            break
        cons = [Rows(A, lo, hi)]
        if inc is not None and model.obj:
            cons.append(Rows(cvec.reshape(1, -1), -np.inf, inc_val - 1 - const))
        opts = {"time_limit": left}
        if slice_nodes is not None:
            opts["node_limit"] = slice_nodes
        r = milp(cvec, constraints=cons, integrality=np.ones_like(cvec),
                 bounds=Bounds(0, ub), options=opts)
        if r.status == 2:  # nothing strictly better: incumbent is optimal
            if inc is None:
                return Solution(None, None, None, "infeasible", trace)
            trace.append((time.perf_counter() - t0, inc_val, inc_val))
            return Solution(inc, inc_val, inc_val, "optimal", trace)
        if r.x is not None:
            x = [int(round(v)) for v in r.x]
            val = model.objective_value(x)
            if inc is None or val < inc_val:
                inc, inc_val = x, val
            db = getattr(r, "mip_dual_bound", None)
            if r.status == 0 or not model.obj:
                trace.append((time.perf_counter() - t0, inc_val, inc_val))
                return Solution(inc, inc_val, inc_val, "optimal", trace)
            if db is not None and np.isfinite(db):
                bound = int(np.ceil(db - 1e-9)) + const
            trace.append((time.perf_counter() - t0, inc_val, bound))
            continue
        if r.x is None and r.status == 1:
            db = getattr(r, "mip_dual_bound", None)
            if db is not None and np.isfinite(db):
                bound = int(np.ceil(db - 1e-9)) + const
            break
        break
    if inc is None:
        return Solution(None, None, None, "unknown", trace)
    if bound is not None:
        bound = min(bound, inc_val)
    return Solution(inc, inc_val, bound, "feasible", trace)


# --- bundled branch and bound ---------------------------------------------------------

class _Search:
    """Depth-first search over (board, operator) groups.

    Each group takes one shape or stays empty.  Auxiliary variables are
    functions of the primaries, so a leaf is checked by completing the
    assignment; pruning uses pairwise compatibility, coverage of each
    operator by its remaining groups, and an LP bound on the objective.
    """

    def __init__(self, model: IlpModel, deadline: float, node_limit: int | None, use_lp: bool):
        self.model = model
        self.deadline = deadline
        self.node_limit = node_limit
        self.nodes = 0
        self.timed_out = False
        groups: dict = {}
        for (t, i, p), vid in sorted(model.primary.items()):
            groups.setdefault((t, i), []).append(vid)
        # most constrained operators first (fewest shapes)
        self.groups = sorted(groups.items(), key=lambda kv: (len(kv[1]), kv[0][1], kv[0][0]))
        self.conflicts: dict = {}
        for c in model.constraints:
            if c.label == "compat":
                (a, _), (b, _) = c.terms
                self.conflicts.setdefault(a, set()).add(b)
                self.conflicts.setdefault(b, set()).add(a)
        self.last_group_of: dict = {}
        for k, ((t, i), _) in enumerate(self.groups):
            self.last_group_of[i] = k
        self.use_lp = use_lp and bool(model.obj)
        if self.use_lp:
            self.arrays = to_arrays(model)
        self.best = None
        self.best_val = None

    def lp_bound(self, fixed: dict) -> float:
        from scipy.optimize import linprog
        from scipy.sparse import vstack

        c, A, lo, hi, ub = self.arrays
        lb_v = np.zeros_like(ub)
        ub_v = ub.copy()
        for v, val in fixed.items():
            lb_v[v] = ub_v[v] = val
        fin_hi = np.isfinite(hi)
        fin_lo = np.isfinite(lo)
        A_ub = vstack([A[fin_hi], -A[fin_lo]]).tocsr()
        b_ub = np.concatenate([hi[fin_hi], -lo[fin_lo]])
        r = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=np.column_stack([lb_v, ub_v]),
                    method="highs")
        if r.status == 2:
            return np.inf
        return r.fun + self.model.obj_const if r.status == 0 else -np.inf

    def run(self, hint) -> None:
        if hint is not None:
            self.best = hint
            self.best_val = self.model.objective_value(hint)
        self.chosen: dict = {}
        self.covered: dict = {}
        self._dfs(0, set())

    def _stop(self) -> bool:
        if self.node_limit is not None and self.nodes >= self.node_limit:
            self.timed_out = True
        if time.perf_counter() > self.deadline:
            self.timed_out = True
        return self.timed_out

    def _dfs(self, k: int, on: set) -> None:
        self.nodes += 1
        if self._stop():
            return
        M = self.model
        if k == len(self.groups):
            x = M.complete({key: 1 for key, vid in M.primary.items() if vid in on})
            if M.is_feasible(x):
                val = M.objective_value(x)
                if self.best_val is None or val < self.best_val:
                    self.best, self.best_val = x, val
            return
        if self.use_lp and self.best_val is not None:
            fixed = {}
            for kk in range(k):
                for vid in self.groups[kk][1]:
                    fixed[vid] = 1 if vid in on else 0
            if self.lp_bound(fixed) > self.best_val - 1 + 1e-6:
                return
        (t, i), vids = self.groups[k]
        options = [v for v in vids if not (self.conflicts.get(v, set()) & on)] + [None]
        for v in options:
            if v is None:
                # leaving the last group of an operator empty must keep coverage
                if self.last_group_of[i] == k and not self.covered.get(i):
                    continue
                self._dfs(k + 1, on)
            else:
                on.add(v)
                self.covered[i] = self.covered.get(i, 0) + 1
                self._dfs(k + 1, on)
                self.covered[i] -= 1
                on.discard(v)
            if self.timed_out:
                return


def _solve_bnb(model: IlpModel, params: SolveParams, hint) -> Solution:
    t0 = time.perf_counter()
    node_limit = int(params.work_limit) if params.work_limit is not None else None
    srch = _Search(model, t0 + params.time_limit, node_limit, use_lp=len(model.primary) > 16)
    srch.run(hint)
    trace = []
    if srch.best is None:
        status = "unknown" if srch.timed_out else "infeasible"
        return Solution(None, None, None, status, trace)
    trace.append((time.perf_counter() - t0, srch.best_val,
                  None if srch.timed_out else srch.best_val))
    if srch.timed_out:
        return Solution(srch.best, srch.best_val, None, "feasible", trace)
    return Solution(srch.best, srch.best_val, srch.best_val, "optimal", trace)


def brute_force(model: IlpModel) -> tuple:
    """Exhaustive (objective, assignment) over all primary assignments."""
    keys = sorted(model.primary)
    n = len(keys)
    if n > 20:
        raise ValueError("brute force is limited to 20 primary variables")
    best = (None, None)
    for mask in range(1 << n):
        x = model.complete({k: (mask >> j) & 1 for j, k in enumerate(keys)})
        if model.is_feasible(x):
            val = model.objective_value(x)
            if best[0] is None or val < best[0]:
                best = (val, x)
    return best
