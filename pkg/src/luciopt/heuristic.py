"""LUCI diagrams, their validation, and the default (greedy) scheduler."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .gauge import GaugeCode, build_gauge_code, drop_operators
from .lattice import Coord, DropoutConfig, build_patch
from .shapes import (CompatibilityOracle, Shape, ShapeCatalog, build_catalog,
                     canonical_faces)

FORMAT_HEADER = "LUCI v1"


class DiagramError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    constraint: str  # compat | measure-once | one-shape | superstab | shape
    detail: str
    witnesses: tuple = ()

    def __str__(self) -> str:
        return f"{self.constraint}: {self.detail}"


class Instance:
    """A gauge code together with its shape catalog and compatibility cache."""

    def __init__(self, code: GaugeCode, catalog: ShapeCatalog | None = None):
        self.code = code
        self.catalog = catalog if catalog is not None else build_catalog(code)
        self.compat = CompatibilityOracle(code, self.catalog)
        self._keyed = {
            i: {(s.measure_qubit, s.layer1, s.layer2): p for p, s in enumerate(lst)}
            for i, lst in self.catalog.items()
        }

    @classmethod
    def from_config(cls, d: int, cfg: DropoutConfig | None = None, legacy: bool = False):
        return cls(build_gauge_code(build_patch(d), cfg, legacy=legacy))

    @property
    def operators(self) -> tuple:
        return self.code.operators

    def lookup(self, op_id: int, root, layer1, layer2) -> int | None:
        return self._keyed[op_id].get((Coord(*root), tuple(sorted(layer1)), tuple(sorted(layer2))))


@dataclass(frozen=True)
class LuciDiagram:
    """``T`` boards, each a partial map operator id -> Shape."""

    instance: Instance = field(compare=False, repr=False)
    boards: tuple
    provenance: str = "heuristic"
    topology: str = "cyclic"
    trimmed: tuple = ()
    duplicates: tuple = ()  # extra (t, i, p) picks that a board map cannot hold

    @property
    def T(self) -> int:
        return len(self.boards)

    @property
    def code(self) -> GaugeCode:
        return self.instance.code

    def measured(self, t: int, i: int) -> bool:
        return i in self.boards[t % self.T]

    def windows(self, width: int) -> list:
        """Start indices of length-``width`` time windows."""
        if self.topology == "cyclic":
            return list(range(self.T))
        return list(range(self.T - width + 1))

    def counts(self) -> dict:
        return {o.id: sum(o.id in b for b in self.boards) for o in self.code.operators}

    def shape_index(self, t: int, i: int) -> int:
        return self.instance.catalog.index(self.boards[t][i])

    # --- text format ---------------------------------------------------------

    def to_text(self) -> str:
        gc = self.code
        lines = [f"{FORMAT_HEADER} d={gc.patch.d} T={self.T}"]
        lines.append("# dropout " + _input_cfg(self).to_json())
        lines.append("# gauges " + ("legacy" if gc.legacy else "weight-one"))
        lines.append("# topology " + self.topology)
        lines.append("# trimmed " + json.dumps([list(q) for q in sorted(self.trimmed)]))
        lines.append("# provenance " + self.provenance)
        for t, board in enumerate(self.boards):
            lines.append("")
            for i in sorted(board):
                s = board[i]
                lines.append(f"{t} {i} {s.measure_qubit[0]} {s.measure_qubit[1]} {s.glyph} {s.basis}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, instance: Instance | None = None) -> "LuciDiagram":
        lines = text.splitlines()
        if not lines or not lines[0].startswith(FORMAT_HEADER):
            raise DiagramError("missing LUCI header")
        try:
            head = dict(tok.split("=") for tok in lines[0].split()[2:])
            d, T = int(head["d"]), int(head["T"])
        except (ValueError, KeyError) as exc:
            raise DiagramError(f"bad header {lines[0]!r}") from exc
        meta = {}
        rows = []
        for ln in lines[1:]:
            if ln.startswith("#"):
                key, _, val = ln[1:].strip().partition(" ")
                meta[key] = val
            elif ln.strip():
                rows.append(ln.split())
        cfg = DropoutConfig.from_json(meta["dropout"]) if "dropout" in meta else DropoutConfig(d)
        legacy = meta.get("gauges", "weight-one") == "legacy"
        trimmed = tuple(Coord(*q) for q in json.loads(meta.get("trimmed", "[]")))
        if instance is None:
            instance = Instance(build_gauge_code(build_patch(d), cfg, legacy=legacy))
            if trimmed:
                instance = trim_instance(instance, trimmed)
        boards = [dict() for _ in range(T)]
        for r in rows:
            if len(r) != 6:
                raise DiagramError(f"malformed line {' '.join(r)!r}")
            t, i, x, y = (int(v) for v in r[:4])
            glyph, basis = r[4], r[5]
            if not 0 <= t < T:
                raise DiagramError(f"board index {t} out of range")
            if i not in instance.catalog.shapes:
                raise DiagramError(f"unknown operator {i}")
            try:
                s = instance.catalog.find(i, (x, y), glyph)
            except KeyError as exc:
                raise DiagramError(str(exc)) from exc
            if s.basis != basis:
                raise DiagramError(f"basis mismatch for operator {i}")
            if i in boards[t]:
                raise DiagramError(f"operator {i} assigned twice in board {t}")
            boards[t][i] = s
        return cls(instance, tuple(boards), meta.get("provenance", "imported"),
                   meta.get("topology", "cyclic"), trimmed)


def _input_cfg(diag: LuciDiagram) -> DropoutConfig:
    # the effective config minus trimmed qubits; rebuilding from it reproduces ids
    cfg = diag.code.cfg
    if not diag.trimmed:
        return cfg
    return DropoutConfig(cfg.d, cfg.broken_qubits - set(diag.trimmed), cfg.broken_couplers, cfg.seed)


# --- validation -------------------------------------------------------------------

def validate_diagram(diag: LuciDiagram) -> list:
    """Every violated diagram invariant, with (t, i, p) witnesses."""
    inst = diag.instance
    out = []
    ops = {o.id for o in diag.code.operators}
    for t, board in enumerate(diag.boards):
        for i, s in board.items():
            if i not in ops:
                out.append(Violation("shape", f"board {t} names unknown operator {i}", ((t, i),)))
            elif s not in inst.catalog[i]:
                out.append(Violation("shape", f"board {t} uses an illegal shape for {i}", ((t, i),)))
        items = sorted((i, s) for i, s in board.items() if i in ops)
        for a in range(len(items)):
            for b in range(a + 1, len(items)):
                (i, s), (j, u) = items[a], items[b]
                if inst.compat(s, u):
                    p, q = inst.catalog.index(s), inst.catalog.index(u)
                    out.append(Violation("compat", f"board {t}: ({i},{p}) clashes with ({j},{q})",
                                         ((t, i, p), (t, j, q))))
    for t, i, p in diag.duplicates:
        out.append(Violation("one-shape", f"board {t} measures operator {i} twice", ((t, i, p),)))
        if i in diag.boards[t]:
            s = inst.catalog[i][p]
            for j, u in diag.boards[t].items():
                if j != i and inst.compat(s, u):
                    out.append(Violation("compat", f"board {t}: ({i},{p}) clashes with {j}",
                                         ((t, i, p),)))
    counts = diag.counts()
    for i in sorted(ops):
        if counts[i] == 0:
            out.append(Violation("measure-once", f"operator {i} is never measured", (i,)))
    for s in diag.code.superstabilizers:
        if not superstabilizer_inferable(diag, s.member_ids):
            out.append(Violation("superstab",
                                 f"superstabilizer {s.id} ({s.basis}, members {list(s.member_ids)}) "
                                 "is never inferable", tuple(s.member_ids)))
    return out


def superstabilizer_inferable(diag: LuciDiagram, members) -> bool:
    for t in diag.windows(2):
        if all(diag.measured(t, j) or diag.measured(t + 1, j) for j in members):
            return True
    return False


# --- default scheduler --------------------------------------------------------------

_SYMMETRIES = (
    lambda c, p: p,
    lambda c, p: (2 * c[0] - p[0], 2 * c[1] - p[1]),
    lambda c, p: (2 * c[0] - p[0], p[1]),
    lambda c, p: (p[0], 2 * c[1] - p[1]),
)


def preferred_shape(inst: Instance, op) -> int:
    """Index of the shape the default scheduler tries first for ``op``.

    The canonical measurement of the op's face is moved by the symmetries of
    the square (identity, half turn, mirrors) until it avoids broken couplers;
    the part of it outside the operator is then dropped.
    """
    shapes = inst.catalog[op.id]
    if len(shapes) == 1:
        return 0
    canon = _canon(inst)[(op.basis, op.face)]
    cfg = inst.code.cfg
    sup = op.support
    for g in _SYMMETRIES:
        root = Coord(*g(op.face, canon.root))
        if root not in sup:
            continue
        layers = []
        ok = True
        for lay in (canon.layer1, canon.layer2):
            moved = []
            for c, t in lay:
                c2, t2 = Coord(*g(op.face, c)), Coord(*g(op.face, t))
                if not (cfg.qubit_ok(c2) and cfg.qubit_ok(t2)):
                    continue
                if not cfg.coupler_ok(c2, t2):
                    ok = False
                if c2 in sup and t2 in sup:
                    moved.append((c2, t2))
            layers.append(moved)
        if not ok:
            continue
        p = inst.lookup(op.id, root, layers[0], layers[1])
        if p is not None:
            return p
    want = {(0, g) for g in canon.layer1} | {(1, g) for g in canon.layer2}

    def score(p):
        s = shapes[p]
        have = {(0, g) for g in s.layer1} | {(1, g) for g in s.layer2}
        return (-len(have & want), -(s.measure_qubit == canon.root), p)

    return min(range(len(shapes)), key=score)


_CANON_CACHE: dict = {}


def _canon(inst: Instance) -> dict:
    d = inst.code.patch.d
    if d not in _CANON_CACHE:
        _CANON_CACHE[d] = canonical_faces(build_patch(d))
    return _CANON_CACHE[d]


def _window_ok(colors) -> bool:
    cs = set(colors)
    return any(cs <= {t, (t + 1) % 4} for t in range(4))


def four_color(inst: Instance) -> dict:
    """Greedy 4-colouring of operators whose preferred shapes clash.

    Colour ``c`` gets priority in board ``c``.  On top of properness the
    members of every superstabilizer must use two cyclically adjacent
    colours, so that one pair of consecutive boards measures all of them;
    gauge clusters that the greedy pass gets wrong are recoloured by a
    small backtracking search.
    """
    ops = inst.operators
    pref = {o.id: inst.catalog[o.id][preferred_shape(inst, o)] for o in ops}
    canon = _canon(inst)
    by_qubit: dict = {}
    for o in ops:
        for q in pref[o.id].qubits:
            by_qubit.setdefault(q, []).append(o.id)
    nbrs = {}
    for o in ops:
        s = pref[o.id]
        near = {j for q in s.qubits for j in by_qubit[q] if j != o.id}
        nbrs[o.id] = sorted(j for j in near if inst.compat(s, pref[j]))

    def order(o):
        phase = canon[(o.basis, o.face)].phase
        return (phase, phase + 2, (phase + 1) % 4, (phase + 3) % 4)

    by_cluster: dict = {}
    for s in inst.code.superstabilizers:
        cid = inst.operators[s.member_ids[0]].region_id
        by_cluster.setdefault(cid, []).append(s.member_ids)
    all_groups = [g for gs in by_cluster.values() for g in gs]

    color: dict = {}
    for o in ops:
        taken = {color[j] for j in nbrs[o.id] if j in color}
        for c in order(o):
            if c not in taken:
                color[o.id] = c
                break
        else:
            members = [o] + [ops[j] for j in nbrs[o.id] if j in color]
            for _ring in range(3):
                if _recolor(members, [], nbrs, color, order):
                    break
                have = {m.id for m in members}
                extra = sorted({j for m in members for j in nbrs[m.id] if j in color} - have)
                members = members + [ops[j] for j in extra]
            else:
                raise DiagramError(f"operator {o.id} needs a fifth colour")
    for cid, groups in sorted(by_cluster.items()):
        if all(_window_ok(color[i] for i in g) for g in groups):
            continue
        members = [o for o in ops if o.region_id == cid]
        for _ring in range(3):
            if _recolor(members, all_groups, nbrs, color, order):
                break
            # free up the neighbourhood and try again
            have = {o.id for o in members}
            extra = sorted({j for o in members for j in nbrs[o.id]} - have)
            members = members + [ops[j] for j in extra]
        else:
            raise DiagramError(f"gauge cluster {cid} admits no consistent colouring")
    assert all(_window_ok(color[i] for i in g) for g in all_groups)
    return color


def _recolor(members, groups, nbrs, color, order, budget: int = 200000) -> bool:
    ids = [o.id for o in members]
    free = set(ids)
    saved = {i: color.pop(i) for i in ids if i in color}
    touching = {i: [g for g in groups if i in g] for i in ids}
    steps = [0]

    def ok(i, c):
        if any(color.get(j) == c for j in nbrs[i]):
            return False
        for g in touching[i]:
            cs = [color[j] for j in g if j in color] + [c]
            if not _window_ok(cs):
                return False
        return True

    def dfs(k):
        steps[0] += 1
        if steps[0] > budget:
            return False
        if k == len(members):
            return True
        o = members[k]
        for c in order(o):
            if ok(o.id, c):
                color[o.id] = c
                if dfs(k + 1):
                    return True
                del color[o.id]
        return False

    if dfs(0):
        return True
    for i in free:
        if i in saved:
            color[i] = saved[i]
    return False


def default_diagram(inst: Instance, T: int = 4, trim: bool = True) -> LuciDiagram:
    """The vanilla LUCI schedule: colour priority per board, then greedy fill."""
    ops = inst.operators
    pref = {o.id: preferred_shape(inst, o) for o in ops}
    color = four_color(inst)
    boards = []
    for t in range(T):
        placed: dict = {}

        def fits(s: Shape) -> bool:
            return all(not inst.compat(s, u) for u in placed.values())

        for c in (t % 4, (t + 2) % 4):
            for o in ops:
                if color[o.id] == c and o.id not in placed:
                    s = inst.catalog[o.id][pref[o.id]]
                    if fits(s):
                        placed[o.id] = s
        for o in ops:
            if o.id in placed:
                continue
            lst = inst.catalog[o.id]
            for p in [pref[o.id]] + [k for k in range(len(lst)) if k != pref[o.id]]:
                if fits(lst[p]):
                    placed[o.id] = lst[p]
                    break
        boards.append(placed)
    diag = LuciDiagram(inst, tuple(boards), "heuristic")
    missing = [i for i, n in diag.counts().items() if n == 0]
    if missing:
        raise DiagramError(f"operators {missing} could not be placed in any board")
    if trim:
        diag = trim_unused_boundary_qubits(diag)
    return diag


# --- trimming --------------------------------------------------------------------

def trimmable_qubits(diag: LuciDiagram) -> list:
    """Boundary measure qubits that only carry an unused weight-one stabilizer."""
    gc = diag.code
    patch = gc.patch
    touching: dict = {}
    for o in gc.operators:
        for q in o.support:
            touching.setdefault(q, []).append(o)
    used: dict = {}
    for board in diag.boards:
        for i, s in board.items():
            for q in s.qubits:
                used.setdefault(q, set()).add(i)
    out = []
    for q in sorted(touching):
        if not patch.is_measure(q) or not patch.on_boundary(q):
            continue
        tops = touching[q]
        if len(tops) != 1:
            continue
        o = tops[0]
        if o.weight != 1 or o.kind != "stabilizer":
            continue
        if used.get(q, set()) - {o.id}:
            continue
        out.append(q)
    return out


def trim_instance(inst: Instance, qubits) -> Instance:
    qubits = set(qubits)
    drop = [o.id for o in inst.operators if o.support <= qubits]
    gc, _ = drop_operators(inst.code, drop, qubits)
    return Instance(gc)


def trim_unused_boundary_qubits(diag: LuciDiagram) -> LuciDiagram:
    qs = trimmable_qubits(diag)
    if not qs:
        return diag
    gc = diag.code
    drop = [o.id for o in gc.operators if o.support <= set(qs)]
    new_gc, id_map = drop_operators(gc, drop, qs)
    inst = Instance(new_gc)
    boards = []
    for board in diag.boards:
        nb = {}
        for i, s in board.items():
            if i in id_map:
                nb[id_map[i]] = replace(s, operator_id=id_map[i])
        boards.append(nb)
    out = LuciDiagram(inst, tuple(boards), diag.provenance, diag.topology,
                      tuple(sorted(set(diag.trimmed) | set(qs))))
    bad = validate_diagram(out)
    if bad:
        raise DiagramError(f"trimming broke the diagram: {bad[0]}")
    return out


def with_boards(diag: LuciDiagram, boards, provenance: str) -> LuciDiagram:
    return LuciDiagram(diag.instance, tuple(boards), provenance, diag.topology, diag.trimmed)
