"""Gauge and stabilizer operators of the mid-cycle code under dropout.

The construction deletes broken qubits from every mid-cycle operator, splits
what is left into pieces connected through usable couplers and keeps only
the largest connected region of the device.  Operators that anticommute
with something become gauges; commuting products of gauges are the
superstabilizers whose values must be inferred from gauge outcomes.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from . import _gf2
from ._pauli import MidCycleOperator, commutes, other_basis
from .lattice import (Coord, DropoutConfig, MidCycleCode, PatchSpec, build_patch,
                      coupler, mid_cycle_operators)


class PatchDestroyedError(ValueError):
    """Raised when dropout leaves no usable region."""


class NoLogicalError(ValueError):
    pass


@dataclass(frozen=True)
class SuperStabilizer:
    id: int
    basis: str
    member_ids: tuple
    combined_support: frozenset


@dataclass(frozen=True)
class GaugeCode:
    """Result of the full gauge construction for one dropout configuration.

    ``cfg`` is the effective configuration, i.e. including qubits broken by
    the legacy cascade or the measure-qubit restriction.
    """

    patch: PatchSpec
    cfg: DropoutConfig
    operators: tuple
    superstabilizers: tuple
    region: frozenset
    discarded_region: frozenset
    legacy: bool = False
    iterations: int = 1

    @property
    def flagged(self) -> bool:
        # cascades longer than this are unusual enough to report
        return self.iterations > 3

    @property
    def qubits(self) -> tuple:
        return tuple(sorted(self.region))

    def op(self, i: int) -> MidCycleOperator:
        return self.operators[i]

    def stabilizers(self) -> list:
        return [o for o in self.operators if o.kind == "stabilizer"]

    def gauges(self) -> list:
        return [o for o in self.operators if o.kind == "gauge"]

    def to_dict(self) -> dict:
        return {
            "d": self.patch.d,
            "legacy": self.legacy,
            "dropout": self.cfg.to_dict(),
            "operators": [
                {"id": o.id, "basis": o.basis, "kind": o.kind, "region_id": o.region_id,
                 "face": list(o.face), "support": [list(q) for q in sorted(o.support)]}
                for o in self.operators
            ],
            "superstabilizers": [
                {"id": s.id, "basis": s.basis, "members": list(s.member_ids)}
                for s in self.superstabilizers
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# --- construction -----------------------------------------------------------

def _components(nodes, cfg: DropoutConfig, patch: PatchSpec) -> list:
    nodes = set(nodes)
    seen, out = set(), []
    for start in sorted(nodes):
        if start in seen:
            continue
        comp, todo = {start}, [start]
        seen.add(start)
        while todo:
            q = todo.pop()
            for n in patch.neighbors(q):
                if n in nodes and n not in seen and cfg.coupler_ok(q, n):
                    seen.add(n)
                    comp.add(n)
                    todo.append(n)
        out.append(frozenset(comp))
    return out


def legacy_cascade(patch: PatchSpec, cfg: DropoutConfig) -> DropoutConfig:
    """Original prescription: two perpendicular dead couplers kill a qubit.

    A coupler is dead when it is broken or touches a broken qubit, so the
    rule is iterated to a fixpoint.
    """
    broken = set(cfg.broken_qubits)
    changed = True
    while changed:
        changed = False
        for q in patch.qubits:
            if q in broken:
                continue
            dead = []
            for n in patch.neighbors(q):
                if n in broken or coupler(q, n) in cfg.broken_couplers:
                    dead.append((n[0] - q[0], n[1] - q[1]))
            if any(a[0] * b[0] + a[1] * b[1] == 0 for a, b in combinations(dead, 2)):
                broken.add(q)
                changed = True
    return DropoutConfig(cfg.d, frozenset(broken), cfg.broken_couplers, cfg.seed)


def _classify(pieces: list) -> tuple:
    """Attach ids, kinds and gauge-cluster ids to ``(basis, support, face)``."""
    pieces = sorted(pieces, key=lambda p: (p[2], p[0], sorted(p[1])))
    n = len(pieces)
    anti = [[] for _ in range(n)]
    by_qubit: dict = {}
    for i, (_b, sup, _f) in enumerate(pieces):
        for q in sup:
            by_qubit.setdefault(q, []).append(i)
    for i, (b, sup, _f) in enumerate(pieces):
        cand = {j for q in sup for j in by_qubit[q] if j > i and pieces[j][0] != b}
        for j in sorted(cand):
            if not commutes(b, sup, pieces[j][0], pieces[j][1]):
                anti[i].append(j)
                anti[j].append(i)
    cluster = [None] * n
    nc = 0
    for i in range(n):
        if not anti[i] or cluster[i] is not None:
            continue
        cluster[i] = nc
        todo = [i]
        while todo:
            k = todo.pop()
            for j in anti[k]:
                if cluster[j] is None:
                    cluster[j] = nc
                    todo.append(j)
        nc += 1
    return tuple(
        MidCycleOperator(id=i, basis=b, support=frozenset(sup), face=Coord(*f),
                         kind="gauge" if anti[i] else "stabilizer", region_id=cluster[i])
        for i, (b, sup, f) in enumerate(pieces)
    )


def apply_dropout(code: MidCycleCode, cfg: DropoutConfig):
    """Cut the mid-cycle operators down to the usable hardware.

    Returns ``(operators, discarded_region)`` where the discarded region is
    the set of live qubits that fell outside the largest connected region.
    """
    patch = code.patch
    cfg.validate(patch)
    alive = [q for q in patch.qubits if cfg.qubit_ok(q)]
    regions = _components(alive, cfg, patch)
    if not regions:
        raise PatchDestroyedError("every qubit is broken")
    keep = min(regions, key=lambda r: (-len(r), min(r)))
    discarded = frozenset(q for q in alive if q not in keep)
    pieces, seen = [], set()
    for op in code.operators:
        sup = [q for q in op.support if q in keep]
        for comp in _components(sup, cfg, patch):
            key = (op.basis, comp)
            if key not in seen:
                seen.add(key)
                pieces.append((op.basis, comp, op.face))
    if not pieces:
        raise PatchDestroyedError("no operator survives dropout")
    return list(_classify(pieces)), discarded


def restrict_to_measure_qubits(operators, code: MidCycleCode, cfg: DropoutConfig,
                               legacy: bool = False, max_iter: int | None = None,
                               discarded=frozenset()):
    """Excise data qubits that carry weight-one operators, to a fixpoint.

    Returns ``(operators, discarded, cfg, iterations)``; ``cfg`` includes the
    excised qubits.
    """
    patch = code.patch
    limit = max_iter or len(patch.qubits) + 1
    it = 1
    while True:
        bad = {next(iter(o.support)) for o in operators
               if o.weight == 1 and patch.is_data(next(iter(o.support)))}
        if not bad:
            return operators, discarded, cfg, it
        if it >= limit:
            raise RuntimeError("measure-qubit restriction did not converge")
        cfg = cfg.with_broken_qubits(bad)
        if legacy:
            cfg = legacy_cascade(patch, cfg)
        operators, discarded = apply_dropout(code, cfg)
        it += 1


def superstabilizers(operators) -> list:
    """Generators of the gauge products that commute with every operator.

    Works one anticommutation cluster and one basis at a time: the kernel
    of the cross-basis overlap matrix gives the commuting products, which are
    then reduced modulo plain stabilizers.
    """
    ops = list(operators)
    by_id = {o.id: o for o in ops}
    clusters: dict = {}
    for o in ops:
        if o.kind == "gauge":
            clusters.setdefault(o.region_id, []).append(o)
    out = []
    for cid in sorted(clusters):
        members = clusters[cid]
        for basis in ("X", "Z"):
            mine = [o for o in members if o.basis == basis]
            theirs = [o for o in members if o.basis != basis]
            if len(mine) < 2:
                continue
            m = np.array([[len(a.support & b.support) % 2 for b in mine] for a in theirs],
                         dtype=bool)
            ker = _gf2.nullspace(m, ncols=len(mine))
            if ker.shape[0] == 0:
                continue
            qubits = sorted({q for o in mine for q in o.support}
                            | {q for o in ops if o.kind == "stabilizer" and o.basis == basis
                               for q in o.support})
            col = {q: k for k, q in enumerate(qubits)}

            def vec(sup):
                v = np.zeros(len(qubits), dtype=bool)
                for q in sup:
                    if q in col:
                        v[col[q]] ^= True
                return v

            stabs = [vec(o.support) for o in ops
                     if o.kind == "stabilizer" and o.basis == basis and o.support & set(qubits)]
            basis_rows = list(stabs)
            cur_rank = _gf2.rank(np.array(basis_rows)) if basis_rows else 0
            for row in ker:
                ids = tuple(mine[k].id for k in np.nonzero(row)[0])
                prod = np.zeros(len(qubits), dtype=bool)
                for i in ids:
                    prod ^= vec(by_id[i].support)
                r = _gf2.rank(np.array(basis_rows + [prod]))
                if r == cur_rank:
                    continue
                basis_rows.append(prod)
                cur_rank = r
                sup = frozenset(q for q, b in zip(qubits, prod) if b)
                out.append((basis, ids, sup))
    result = []
    for k, (basis, ids, sup) in enumerate(out):
        if len(ids) < 2:
            raise RuntimeError(f"superstabilizer with a single member {ids}")
        for o in ops:
            if not commutes(basis, sup, o.basis, o.support):
                raise RuntimeError(f"superstabilizer {ids} anticommutes with operator {o.id}")
        result.append(SuperStabilizer(k, basis, ids, sup))
    return result


def build_gauge_code(patch_or_d, cfg: DropoutConfig | None = None, legacy: bool = False,
                     restrict: bool = True) -> GaugeCode:
    """Full pipeline: dropout, measure-qubit restriction and superstabilizers."""
    patch = patch_or_d if isinstance(patch_or_d, PatchSpec) else build_patch(patch_or_d)
    cfg = cfg if cfg is not None else DropoutConfig(patch.d)
    code = mid_cycle_operators(patch)
    cfg.validate(patch)
    if legacy:
        cfg = legacy_cascade(patch, cfg)
    ops, discarded = apply_dropout(code, cfg)
    it = 1
    if restrict:
        ops, discarded, cfg, it = restrict_to_measure_qubits(ops, code, cfg, legacy=legacy,
                                                             discarded=discarded)
    region = frozenset(q for o in ops for q in o.support)
    sst = superstabilizers(ops)
    return GaugeCode(patch, cfg, tuple(ops), tuple(sst), region, discarded, legacy, it)


def drop_operators(gc: GaugeCode, remove_ids, remove_qubits=()) -> tuple:
    """Remove operators (and idle qubits) and renumber; returns (code, id map)."""
    remove_ids = set(remove_ids)
    kept = [o for o in gc.operators if o.id not in remove_ids]
    id_map = {o.id: k for k, o in enumerate(kept)}
    ops = tuple(replace(o, id=id_map[o.id]) for o in kept)
    sst = tuple(
        SuperStabilizer(s.id, s.basis, tuple(id_map[i] for i in s.member_ids), s.combined_support)
        for s in gc.superstabilizers
    )
    region = gc.region - frozenset(remove_qubits)
    cfg = gc.cfg.with_broken_qubits(remove_qubits) if remove_qubits else gc.cfg
    return replace(gc, cfg=cfg, operators=ops, superstabilizers=sst, region=region), id_map


# --- logical operators and distance ------------------------------------------

def _index(qubits):
    return {q: k for k, q in enumerate(qubits)}


def _rows(sups, col, n):
    m = np.zeros((len(sups), n), dtype=bool)
    for r, sup in enumerate(sups):
        for q in sup:
            m[r, col[q]] = True
    return m


def _code_parts(gc_or_ops, superstabs=None):
    if isinstance(gc_or_ops, GaugeCode):
        ops = list(gc_or_ops.operators)
        sst = list(gc_or_ops.superstabilizers)
    else:
        ops = list(gc_or_ops)
        sst = list(superstabs) if superstabs is not None else superstabilizers(ops)
    qubits = sorted({q for o in ops for q in o.support})
    return ops, sst, qubits


def bare_logicals(gc_or_ops, basis: str, superstabs=None) -> list:
    """Supports of independent bare logicals of type ``basis``.

    Bare logicals commute with every stabilizer and gauge operator and are
    not generated by same-basis operators.
    """
    ops, _sst, qubits = _code_parts(gc_or_ops, superstabs)
    col, n = _index(qubits), len(qubits)
    opp = _rows([o.support for o in ops if o.basis != basis], col, n)
    same = _rows([o.support for o in ops if o.basis == basis], col, n)
    cand = _gf2.nullspace(opp, ncols=n)
    span, piv = _gf2.rref(same) if same.size else (np.zeros((0, n), bool), [])
    out = []
    acc = span.copy()
    for v in cand:
        if not _gf2.reduce(span, piv, v).any():
            continue
        if _gf2.rank(np.vstack([acc, v])) > _gf2.rank(acc):
            acc = np.vstack([acc, v])
            out.append(frozenset(q for q, b in zip(qubits, v) if b))
    return out


def _shortest_logical(qubits, checks, parity_sup):
    """Minimum-weight error with zero syndrome on ``checks`` and odd overlap
    with ``parity_sup``; ``None`` when no such error exists.

    Assumes every qubit meets at most two checks, so errors are edge sets of
    a graph with one extra boundary vertex.
    """
    nchk = len(checks)
    touch: dict = {q: [] for q in qubits}
    for c, sup in enumerate(checks):
        for q in sup:
            touch[q].append(c)
    boundary = nchk
    adj = [[] for _ in range(nchk + 1)]
    for q in qubits:
        t = touch[q]
        par = 1 if q in parity_sup else 0
        if len(t) > 2:
            raise ValueError("check structure is not graph-like")
        a, b = (t + [boundary, boundary])[:2]
        adj[a].append((b, par, q))
        if a != b:
            adj[b].append((a, par, q))
    best = None
    for src in range(nchk + 1):
        dist = {(src, 0): 0}
        prev = {}
        dq = deque([(src, 0)])
        while dq:
            node = dq.popleft()
            if node == (src, 1):
                break
            v, p = node
            if best is not None and dist[node] >= best[0]:
                break
            for w, par, q in adj[v]:
                nxt = (w, p ^ par)
                if nxt not in dist:
                    dist[nxt] = dist[node] + 1
                    prev[nxt] = (node, q)
                    dq.append(nxt)
        if (src, 1) in dist and (best is None or dist[(src, 1)] < best[0]):
            path, node = [], (src, 1)
            while node != (src, 0):
                node, q = prev[node]
                path.append(q)
            sup = set()
            for q in path:
                sup ^= {q}
            best = (dist[(src, 1)], frozenset(sup))
    return best


def logical_witness(gc_or_ops, basis: str, superstabs=None):
    """(distance, support) of a minimum-weight dressed logical of ``basis``."""
    ops, sst, qubits = _code_parts(gc_or_ops, superstabs)
    opp = other_basis(basis)
    partners = bare_logicals(ops, opp)
    if not partners:
        raise NoLogicalError("surviving region encodes no logical qubit")
    checks = [o.support for o in ops if o.basis == opp and o.kind == "stabilizer"]
    checks += [s.combined_support for s in sst if s.basis == opp]
    best = None
    for lp in partners:
        try:
            res = _shortest_logical(qubits, checks, lp)
        except ValueError:
            res = _exhaustive_logical(qubits, checks, lp, len(qubits))
        if res is not None and (best is None or res[0] < best[0]):
            best = res
    if best is None:
        raise NoLogicalError(f"no {basis} logical found")
    return best


def _exhaustive_logical(qubits, checks, parity_sup, max_weight):
    masks = {q: 0 for q in qubits}
    for c, sup in enumerate(checks):
        for q in sup:
            masks[q] |= 1 << c
    for w in range(1, max_weight + 1):
        for combo in combinations(qubits, w):
            s, par = 0, 0
            for q in combo:
                s ^= masks[q]
                par ^= q in parity_sup
            if s == 0 and par:
                return w, frozenset(combo)
    return None


def code_distance(gc_or_ops, basis: str, superstabs=None) -> int:
    """Dressed distance for errors of type ``basis``."""
    return logical_witness(gc_or_ops, basis, superstabs)[0]


def is_logical(gc_or_ops, basis: str, support, superstabs=None) -> bool:
    """True when ``support`` is a nontrivial dressed logical of ``basis``."""
    ops, sst, _q = _code_parts(gc_or_ops, superstabs)
    opp = other_basis(basis)
    sup = set(support)
    for o in ops:
        if o.basis == opp and o.kind == "stabilizer" and len(o.support & sup) % 2:
            return False
    for s in sst:
        if s.basis == opp and len(s.combined_support & sup) % 2:
            return False
    return any(len(lp & sup) % 2 for lp in bare_logicals(ops, opp))


def trim_unused_boundary_qubits(diagram, operators=None) -> tuple:
    """Drop boundary qubits that only a lone weight-one stabilizer touches.

    Returns ``(operators, diagram)``; ``operators`` is accepted for symmetry
    with the other passes and must match the diagram's code when given.
    """
    from .heuristic import trim_unused_boundary_qubits as _trim

    if operators is not None and tuple(operators) != tuple(diagram.code.operators):
        raise ValueError("operators do not belong to this diagram")
    out = _trim(diagram)
    return out.code.operators, out
