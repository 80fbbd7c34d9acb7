"""Lowering of a scheduling instance to a 0-1 integer linear program.

Primary variables ``v_t_i_p`` select shape ``p`` for operator ``i`` in board
``t``.  Everything else (measurement indicators, skip flags, alignment
slacks, basis-change indicators) is an auxiliary defined exactly by linear
constraints, so any primary assignment extends to at most one feasible full
assignment and the objective can be evaluated off-optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .heuristic import Instance, LuciDiagram
from .shapes import stretches

LABELS = ("compat", "measure-once", "one-shape", "superstab", "lin-and", "lin-or",
          "align-slack", "objective-def")


@dataclass(frozen=True)
class Var:
    id: int
    name: str
    tag: str  # primary | aux-f | aux-or | aux-and | aux-s
    ub: int = 1


@dataclass(frozen=True)
class LinearConstraint:
    terms: tuple  # ((var_id, coef), ...)
    sense: str  # "<=", ">=", "="
    rhs: int
    label: str

    def satisfied(self, x) -> bool:
        lhs = sum(c * x[v] for v, c in self.terms)
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class Objective:
    """Weights of  -m + alpha*s2 + beta*s3 + gamma*a + delta*b  (minimised)."""

    alpha: float = 6
    beta: float = 5
    gamma: float = 12
    delta: float = 2
    mode: str = "full"

    def __post_init__(self):
        if self.mode not in ("full", "max-meas"):
            raise ValueError(f"unknown objective mode {self.mode!r}")
        for name in ("alpha", "beta", "gamma", "delta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def max_measurements(cls) -> "Objective":
        return cls(0, 0, 0, 0, "max-meas")

    def weights(self) -> tuple:
        if self.mode == "max-meas":
            return (Fraction(0),) * 4
        return tuple(Fraction(w).limit_denominator(10**6)
                     for w in (self.alpha, self.beta, self.gamma, self.delta))

    def scale(self) -> int:
        return math.lcm(*(w.denominator for w in self.weights()), 1)

    def combine(self, terms) -> Fraction:
        m, s2, s3, a, b = terms
        al, be, ga, de = self.weights()
        return -m + al * s2 + be * s3 + ga * a + de * b


@dataclass
class IlpModel:
    instance: Instance
    T: int
    topology: str
    objective: Objective | None
    vars: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    obj: dict = field(default_factory=dict)  # var id -> integer coefficient (scaled)
    obj_const: int = 0
    scale: int = 1
    defs: list = field(default_factory=list)  # (var id, kind, args) in build order
    primary: dict = field(default_factory=dict)  # (t, i, p) -> var id
    f: dict = field(default_factory=dict)  # (t, i) -> var id
    term_vars: dict = field(default_factory=dict)  # term name -> [(var id, weight)]
    victims: list = field(default_factory=list)  # (basis, support, member ids)
    root_qubits: tuple = ()

    # --- construction helpers ------------------------------------------------

    def add_var(self, name: str, tag: str, ub: int = 1) -> int:
        v = Var(len(self.vars), name, tag, ub)
        self.vars.append(v)
        return v.id

    def add(self, terms, sense: str, rhs: int, label: str) -> None:
        merged: dict = {}
        for v, c in terms:
            merged[v] = merged.get(v, 0) + c
        terms = tuple(sorted((v, c) for v, c in merged.items() if c))
        self.constraints.append(LinearConstraint(terms, sense, int(rhs), label))

    def or_var(self, name: str, args, tag: str = "aux-or", label: str = "lin-or") -> int:
        args = sorted(set(args))
        y = self.add_var(name, tag)
        for a in args:
            self.add([(y, 1), (a, -1)], ">=", 0, label)
        self.add([(y, 1)] + [(a, -1) for a in args], "<=", 0, label)
        self.defs.append((y, "or", tuple(args)))
        return y

    def and_var(self, name: str, args, tag: str = "aux-and", label: str = "lin-and") -> int:
        args = sorted(set(args))
        y = self.add_var(name, tag)
        for a in args:
            self.add([(y, 1), (a, -1)], "<=", 0, label)
        self.add([(y, 1)] + [(a, -1) for a in args], ">=", 1 - len(args), label)
        self.defs.append((y, "and", tuple(args)))
        return y

    def any_not_var(self, name: str, args) -> int:
        """y = OR_k (1 - args_k)."""
        args = sorted(set(args))
        y = self.add_var(name, "aux-or")
        for a in args:
            self.add([(y, 1), (a, 1)], ">=", 1, "objective-def")
        self.add([(y, 1)] + [(a, 1) for a in args], "<=", len(args), "objective-def")
        self.defs.append((y, "any_not", tuple(args)))
        return y

    # --- evaluation ------------------------------------------------------------

    @property
    def n_primary(self) -> int:
        return len(self.primary)

    @property
    def stats(self) -> dict:
        return {"variables": len(self.vars), "constraints": len(self.constraints),
                "primary": self.n_primary}

    def complete(self, primary_values) -> list:
        """Extend an assignment of the primary variables to all variables."""
        x = [0] * len(self.vars)
        if isinstance(primary_values, dict):
            for key, vid in self.primary.items():
                x[vid] = int(primary_values.get(key, 0))
        else:
            for vid, val in zip(sorted(self.primary.values()), primary_values):
                x[vid] = int(val)
        for y, kind, args in self.defs:
            if kind == "or":
                x[y] = int(any(x[a] for a in args))
            elif kind == "and":
                x[y] = int(all(x[a] for a in args))
            elif kind == "any_not":
                x[y] = int(not all(x[a] for a in args))
            elif kind == "excess":
                z, xs = args
                x[y] = sum(x[a] for a in xs) - x[z]
            else:
                raise AssertionError(kind)
        return x

    def violations(self, x) -> list:
        out = []
        for v in self.vars:
            if not 0 <= x[v.id] <= v.ub:
                out.append(f"bound: {v.name}={x[v.id]}")
        for k, c in enumerate(self.constraints):
            if not c.satisfied(x):
                out.append(f"{c.label}#{k}")
        return out

    def is_feasible(self, x) -> bool:
        return not self.violations(x)

    def objective_value(self, x) -> int:
        """Scaled integer objective (divide by ``scale`` for objective units)."""
        return self.obj_const + sum(c * x[v] for v, c in self.obj.items())

    def terms(self, x) -> tuple:
        """(m, s2, s3, a, b) read off a full assignment."""
        def tot(name):
            return sum(w * x[v] for v, w in self.term_vars.get(name, ()))
        nq = self.term_vars.get("b_const", 0)
        return (tot("m"), tot("s2"), tot("s3"), tot("a"), nq - tot("J"))

    def decode(self, x) -> LuciDiagram:
        """Diagram chosen by an assignment; duplicate picks are kept aside."""
        boards = [dict() for _ in range(self.T)]
        dups = []
        for (t, i, p), vid in sorted(self.primary.items()):
            if x[vid]:
                s = self.instance.catalog[i][p]
                if i in boards[t]:
                    dups.append((t, i, p))
                else:
                    boards[t][i] = s
        return LuciDiagram(self.instance, tuple(boards), "optimized", self.topology,
                           duplicates=tuple(dups))

    # --- interchange -----------------------------------------------------------

    def to_lp(self) -> str:
        """CPLEX-LP text of the model (objective constant given in a comment)."""
        name = [v.name for v in self.vars]
        lines = [f"\\ luciopt model T={self.T} topology={self.topology} scale={self.scale}",
                 f"\\ objective constant {self.obj_const}", "Minimize"]
        obj = " ".join(f"{'+' if c > 0 else '-'} {abs(c)} {name[v]}"
                       for v, c in sorted(self.obj.items()))
        lines.append(" obj: " + (obj if obj else "0 " + name[0]))
        lines.append("Subject To")
        sense = {"<=": "<=", ">=": ">=", "=": "="}
        for k, c in enumerate(self.constraints):
            lhs = " ".join(f"{'+' if a > 0 else '-'} {abs(a)} {name[v]}" for v, a in c.terms)
            lines.append(f" {c.label.replace('-', '_')}_{k}: {lhs} {sense[c.sense]} {c.rhs}")
        lines.append("Bounds")
        for v in self.vars:
            if v.ub != 1:
                lines.append(f" 0 <= {v.name} <= {v.ub}")
        lines.append("Binaries")
        lines.extend(" " + v.name for v in self.vars if v.ub == 1)
        gens = [v.name for v in self.vars if v.ub != 1]
        if gens:
            lines.append("Generals")
            lines.extend(" " + g for g in gens)
        lines.append("End")
        return "\n".join(lines) + "\n"


def build_model(instance: Instance, T: int = 4, objective: Objective | None = Objective(),
                topology: str = "cyclic") -> IlpModel:
    """Build the scheduling ILP.

    With ``objective=None`` only the structural constraints (compatibility,
    coverage, uniqueness, superstabilizer inference) are emitted; this is
    the model used for plain feasibility questions.
    """
    if T < 2:
        raise ValueError("need at least two boards")
    if topology not in ("cyclic", "open"):
        raise ValueError(f"unknown time topology {topology!r}")
    cat = instance.catalog
    ops = instance.operators
    for o in ops:
        if not cat[o.id]:
            raise ValueError(f"operator {o.id} has an empty catalog")
    M = IlpModel(instance, T, topology, objective)

    def win(width):
        return list(range(T)) if topology == "cyclic" else list(range(T - width + 1))

    for t in range(T):
        for o in ops:
            for p in range(len(cat[o.id])):
                M.primary[(t, o.id, p)] = M.add_var(f"v_{t}_{o.id}_{p}", "primary")

    # compatibility, one pair constraint per board
    pairs = instance.compat.conflicting_pairs()
    for t in range(T):
        for (i, p), (j, q) in pairs:
            M.add([(M.primary[(t, i, p)], 1), (M.primary[(t, j, q)], 1)], "<=", 1, "compat")
    for o in ops:
        M.add([(M.primary[(t, o.id, p)], 1) for t in range(T) for p in range(len(cat[o.id]))],
              ">=", 1, "measure-once")
    for t in range(T):
        for o in ops:
            M.add([(M.primary[(t, o.id, p)], 1) for p in range(len(cat[o.id]))],
                  "<=", 1, "one-shape")
    for t in range(T):
        for o in ops:
            M.f[(t, o.id)] = M.or_var(f"f_{t}_{o.id}",
                                      [M.primary[(t, o.id, p)] for p in range(len(cat[o.id]))],
                                      tag="aux-f")
    f = M.f
    g = {}
    for t in win(2):
        for o in ops:
            g[(t, o.id)] = M.or_var(f"g_{t}_{o.id}", [f[(t, o.id)], f[((t + 1) % T, o.id)]])
    for k, s in enumerate(instance.code.superstabilizers):
        hs = [M.and_var(f"h_{t}_{k}", [g[(t, j)] for j in s.member_ids]) for t in win(2)]
        M.add([(h, 1) for h in hs], ">=", 1, "superstab")

    if objective is None:
        return M
    _objective(M, instance, objective, win, g)
    return M


def _objective(M: IlpModel, instance: Instance, objective: Objective, win, g) -> None:
    T = M.T
    ops = instance.operators
    cat = instance.catalog
    f = M.f
    scale = objective.scale()
    al, be, ga, de = (int(w * scale) for w in objective.weights())
    M.scale = scale
    full = objective.mode == "full"
    terms = {"m": [], "s2": [], "s3": [], "a": [], "J": []}

    for o in ops:
        if o.kind == "stabilizer":
            terms["m"] += [(f[(t, o.id)], 1) for t in range(T)]
        else:
            for t in range(T) if M.topology == "cyclic" else range(1, T):
                e = M.and_var(f"e_{t}_{o.id}", [f[((t - 1) % T, o.id)], f[(t, o.id)]])
                terms["m"].append((e, 1))

    if full:
        for o in ops:
            s2 = M.any_not_var(f"s2_{o.id}", [g[(t, o.id)] for t in win(2)])
            terms["s2"].append((s2, 1))
            ks = [M.or_var(f"k_{t}_{o.id}", [f[((t + r) % T, o.id)] for r in range(3)])
                  for t in win(3)]
            if ks:
                s3 = M.any_not_var(f"s3_{o.id}", ks)
                terms["s3"].append((s3, 1))

        # alignment: at most one stretching shape per victim and board is free
        victims = [(o.basis, o.support, frozenset([o.id])) for o in ops if o.kind == "stabilizer"]
        victims += [(s.basis, s.combined_support, frozenset(s.member_ids))
                    for s in instance.code.superstabilizers]
        M.victims = victims
        by_qubit: dict = {}
        for i, lst in cat.items():
            for p, sh in enumerate(lst):
                for q in {q for gate in sh.gates for q in gate}:
                    by_qubit.setdefault(q, set()).add((i, p))
        for k, (basis, sup, members) in enumerate(victims):
            near = sorted({ip for q in sup for ip in by_qubit.get(q, ())})
            hits = [(i, p) for i, p in near
                    if i not in members and stretches(basis, sup, cat[i][p])]
            if len(hits) < 2:
                continue
            for t in range(T):
                xs = [M.primary[(t, i, p)] for i, p in hits]
                z = M.or_var(f"z_{t}_{k}", xs)
                s = M.add_var(f"a_{t}_{k}", "aux-s", ub=len(xs) - 1)
                M.add([(s, 1), (z, 1)] + [(x, -1) for x in xs], "=", 0, "align-slack")
                M.defs.append((s, "excess", (z, tuple(xs))))
                terms["a"].append((s, 1))

        # basis changes of each measure qubit between consecutive boards
        roots: dict = {}
        for i, lst in cat.items():
            for p, sh in enumerate(lst):
                roots.setdefault(sh.measure_qubit, {}).setdefault(sh.basis, []).append((i, p))
        M.root_qubits = tuple(sorted(roots))
        u = {}
        for q in M.root_qubits:
            for basis, ips in sorted(roots[q].items()):
                for t in range(T):
                    u[(q, t, basis)] = M.or_var(f"u_{q[0]}_{q[1]}_{t}_{basis}",
                                                [M.primary[(t, i, p)] for i, p in ips])
        for q in M.root_qubits:
            for basis in sorted(roots[q]):
                for t in win(2):
                    J = M.and_var(f"J_{q[0]}_{q[1]}_{t}_{basis}",
                                  [u[(q, t, basis)], u[(q, (t + 1) % T, basis)]])
                    terms["J"].append((J, 1))
        M.term_vars["b_const"] = len(M.root_qubits) * len(win(2))

    M.term_vars.update(terms)
    obj: dict = {}
    for v, w in terms["m"]:
        obj[v] = obj.get(v, 0) - w * scale
    for name, weight in (("s2", al), ("s3", be), ("a", ga)):
        for v, w in terms[name]:
            obj[v] = obj.get(v, 0) + w * weight
    for v, w in terms["J"]:
        obj[v] = obj.get(v, 0) - w * de
    M.obj = {v: c for v, c in obj.items() if c}
    M.obj_const = de * M.term_vars.get("b_const", 0)


# --- direct evaluation on diagrams ------------------------------------------------

def objective_terms(diag: LuciDiagram) -> tuple:
    """(m, s2, s3, a, b) computed straight from a diagram.

    Deliberately independent of the model's auxiliary variables, so the two
    can be checked against each other.
    """
    inst = diag.instance
    T = diag.T
    cyc = diag.topology == "cyclic"
    ops = inst.operators

    def F(t, i):
        return diag.measured(t % T, i)

    starts2 = range(T) if cyc else range(T - 1)
    starts3 = range(T) if cyc else range(T - 2)
    m = 0
    for o in ops:
        if o.kind == "stabilizer":
            m += sum(F(t, o.id) for t in range(T))
        else:
            m += sum(F(t - 1, o.id) and F(t, o.id) for t in (range(T) if cyc else range(1, T)))
    s2 = sum(any(not (F(t, o.id) or F(t + 1, o.id)) for t in starts2) for o in ops)
    s3 = sum(any(not (F(t, o.id) or F(t + 1, o.id) or F(t + 2, o.id)) for t in starts3)
             for o in ops)
    victims = [(o.basis, o.support, {o.id}) for o in ops if o.kind == "stabilizer"]
    victims += [(s.basis, s.combined_support, set(s.member_ids))
                for s in inst.code.superstabilizers]
    a = 0
    for t, board in enumerate(diag.boards):
        for basis, sup, members in victims:
            n = sum(1 for i, s in board.items() if i not in members and stretches(basis, sup, s))
            a += max(0, n - 1)
    roots = sorted({s.measure_qubit for lst in inst.catalog.shapes.values() for s in lst})
    b = 0
    for q in roots:
        at = []
        for board in diag.boards:
            bs = [s.basis for s in board.values() if s.measure_qubit == q]
            at.append(bs[0] if len(bs) == 1 else None)
        for t in starts2:
            x, y = at[t], at[(t + 1) % T]
            b += 0 if (x is not None and x == y) else 1
    return (m, s2, s3, a, b)


def diagram_objective(diag: LuciDiagram, objective: Objective = Objective()) -> Fraction:
    return objective.combine(objective_terms(diag))


def hint_from_diagram(model: IlpModel, diag: LuciDiagram) -> list:
    """Full model assignment reproducing ``diag``; raises if it is infeasible."""
    if diag.T != model.T:
        raise ValueError(f"diagram has {diag.T} boards, model has {model.T}")
    prim = {}
    for t, board in enumerate(diag.boards):
        for i, s in board.items():
            prim[(t, i, model.instance.catalog.index(s))] = 1
    x = model.complete(prim)
    bad = model.violations(x)
    if bad:
        raise ValueError(f"hint violates {len(bad)} constraints, first: {bad[:5]}")
    return x


def assignment_from_primary(model: IlpModel, keys: Iterable) -> list:
    return model.complete({k: 1 for k in keys})
