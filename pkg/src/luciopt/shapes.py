"""Measurement subcircuits ("shapes") and the predicates used by the ILP.

A shape is a CNOT tree of depth at most two rooted at the qubit that gets
measured.  Edges between depth one and depth two ("legs") run in the first
CNOT layer, and the root edge feeding such a leg (the "crossbeam") runs in
the second.  Z-type shapes point every CNOT towards the root, X-type shapes
point away from it, so either way the operator collapses onto the root.

Glyphs
------
Every shape is named by one character, unique given its operator and root:

* ``Q E Z C`` (uppercase): direction of the second-layer root edge,
  north-west / north-east / south-west / south-east (north is -y);
* ``q e z c`` (lowercase): no second-layer root edge, the single first-layer
  root edge points that way (weight-two shapes only);
* ``o``: weight one, measure and reset only.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations

from ._pauli import css_to_sparse, is_single_qubit, propagate
from .lattice import Coord, DropoutConfig, PatchSpec

GLYPH_DIRS = {(-1, -1): "q", (1, -1): "e", (-1, 1): "z", (1, 1): "c"}
DIR_OF_GLYPH = {g: d for d, g in GLYPH_DIRS.items()}


class ShapeError(RuntimeError):
    pass


@dataclass(frozen=True)
class Shape:
    operator_id: int
    basis: str
    measure_qubit: Coord
    layer1: tuple  # sorted (control, target) pairs
    layer2: tuple
    glyph: str

    @property
    def layers(self) -> tuple:
        return (self.layer1, self.layer2)

    @property
    def gates(self) -> tuple:
        return self.layer1 + self.layer2

    @property
    def qubits(self) -> frozenset:
        return frozenset([self.measure_qubit, *(q for g in self.gates for q in g)])

    def layer_qubits(self, k: int) -> dict:
        """qubit -> gate for CNOT layer ``k`` (0 or 1)."""
        return {q: g for g in self.layers[k] for q in g}

    def waypoints(self) -> frozenset:
        """Qubits that relay other qubits towards the root."""
        return frozenset(q for g in self.layer1 for q in g
                         if q != self.measure_qubit and any(q in h for h in self.layer2))

    def key(self) -> tuple:
        return (self.measure_qubit, self.glyph)


def _direction(frm, to) -> tuple:
    return (to[0] - frm[0], to[1] - frm[1])


def _gate(basis: str, parent, child) -> tuple:
    return (child, parent) if basis == "Z" else (parent, child)


def _trees(support: frozenset, root, usable) -> list:
    """Depth <= 2 spanning trees of ``support`` rooted at ``root``, with layers.

    Each result is ``(l1_edges, l2_edges)`` as (parent, child) tuples.
    """
    others = sorted(support - {root})
    out = []
    kids = [q for q in others if usable(root, q)]
    n = len(others)
    # choose the root's children (at most two: one per layer)
    for r in range(1, 3):
        for chosen in combinations(kids, r):
            rest = [q for q in others if q not in chosen]
            # every remaining qubit hangs under a distinct child, in layer 1
            for assign in _assignments(rest, chosen, usable):
                if assign is None:
                    continue
                parents_with_kids = set(assign.values())
                legs = [(p, c) for c, p in assign.items()]
                cross = [(root, c) for c in chosen if c in parents_with_kids]
                plain = [(root, c) for c in chosen if c not in parents_with_kids]
                if len(cross) > 1:
                    continue
                if cross:
                    if len(plain) > 0 and len(chosen) == 2:
                        out.append((tuple(legs + plain), tuple(cross)))
                    elif len(chosen) == 1:
                        out.append((tuple(legs), tuple(cross)))
                else:
                    if len(plain) == 1:
                        out.append(((plain[0],), ()))
                        out.append(((), (plain[0],)))
                    else:
                        a, b = plain
                        out.append(((a,), (b,)))
                        out.append(((b,), (a,)))
    if n == 0:
        out.append(((), ()))
    return out


def _assignments(rest, parents, usable):
    """All injective maps rest -> parents using usable couplers."""
    if not rest:
        yield {}
        return
    if len(rest) > len(parents):
        return
    for perm in permutations(parents, len(rest)):
        if all(usable(p, c) for c, p in zip(rest, perm)):
            yield dict(zip(rest, perm))


def _make(op_id, basis, root, l1, l2) -> Shape:
    if l2:
        (_p, c), = [e for e in l2]
        glyph = GLYPH_DIRS[_direction(root, c)].upper()
    elif l1:
        root_edges = [e for e in l1 if e[0] == root]
        glyph = GLYPH_DIRS[_direction(root, root_edges[0][1])]
    else:
        glyph = "o"
    g1 = tuple(sorted(_gate(basis, p, c) for p, c in l1))
    g2 = tuple(sorted(_gate(basis, p, c) for p, c in l2))
    return Shape(op_id, basis, Coord(*root), g1, g2, glyph)


def enumerate_shapes(op, cfg: DropoutConfig | None = None, patch: PatchSpec | None = None,
                     restrict: bool = True) -> list:
    """All shapes measuring ``op``; roots limited to measure qubits when
    ``restrict`` is set."""
    support = frozenset(op.support)

    def usable(a, b):
        if abs(a[0] - b[0]) != 1 or abs(a[1] - b[1]) != 1:
            return False
        return cfg is None or cfg.coupler_ok(a, b)

    out = []
    for root in sorted(support):
        if restrict:
            ok = patch.is_measure(root) if patch is not None else (root[0] % 2 == 0 and root[1] % 2 == 0)
            if not ok:
                continue
        for l1, l2 in _trees(support, root, usable):
            out.append(_make(op.id, op.basis, root, l1, l2))
    out = sorted(set(out), key=Shape.key)
    return out


def measures(shape: Shape, basis: str, support) -> bool:
    img = propagate(css_to_sparse(basis, support), shape.layers)
    return is_single_qubit(img, shape.measure_qubit, basis)


@dataclass(frozen=True)
class ShapeCatalog:
    """Legal shapes per operator id; list index is the ILP shape index."""

    shapes: dict

    def __getitem__(self, i: int) -> tuple:
        return self.shapes[i]

    def __len__(self) -> int:
        return len(self.shapes)

    def items(self):
        return self.shapes.items()

    def index(self, shape: Shape) -> int:
        return self.shapes[shape.operator_id].index(shape)

    def find(self, op_id: int, root, glyph: str) -> Shape:
        for s in self.shapes[op_id]:
            if s.measure_qubit == tuple(root) and s.glyph == glyph:
                return s
        raise KeyError(f"operator {op_id} has no shape {glyph!r} at {tuple(root)}")

    def total(self) -> int:
        return sum(len(v) for v in self.shapes.values())


def build_catalog(gc) -> ShapeCatalog:
    shapes = {}
    for op in gc.operators:
        lst = enumerate_shapes(op, gc.cfg, gc.patch)
        if not lst:
            raise ShapeError(f"operator {op.id} ({op.basis} on {sorted(op.support)}) has no shape")
        for s in lst:
            if not measures(s, op.basis, op.support):
                raise ShapeError(f"shape {s} does not measure operator {op.id}")
        shapes[op.id] = tuple(lst)
    return ShapeCatalog(shapes)


# --- predicates ---------------------------------------------------------------

def _layer_clash(a: Shape, b: Shape) -> bool:
    for k in (0, 1):
        la, lb = a.layer_qubits(k), b.layer_qubits(k)
        for q, g in la.items():
            h = lb.get(q)
            if h is not None and h != g:
                return True
    return a.measure_qubit == b.measure_qubit


def _joint_ok(a: Shape, b: Shape, op_a, op_b) -> bool:
    layers = tuple(tuple(sorted(set(a.layers[k]) | set(b.layers[k]))) for k in (0, 1))
    for s, (basis, sup) in ((a, op_a), (b, op_b)):
        img = propagate(css_to_sparse(basis, sup), layers)
        if not is_single_qubit(img, s.measure_qubit, basis):
            return False
    return True


def incompatible(a: Shape, b: Shape, op_a, op_b) -> bool:
    """Whether two shapes cannot share a board.

    ``op_a``/``op_b`` are ``(basis, support)`` of the measured operators.
    """
    if a.operator_id == b.operator_id:
        raise ValueError("incompatibility is only defined across operators")
    if not (a.qubits & b.qubits):
        return False
    if _layer_clash(a, b):
        return True
    if op_a[0] != op_b[0] and len(set(op_a[1]) & set(op_b[1])) % 2:
        return True
    return not _joint_ok(a, b, op_a, op_b)


class CompatibilityOracle:
    """Memoised pairwise incompatibility over one catalog."""

    def __init__(self, gc, catalog: ShapeCatalog):
        self.gc = gc
        self.catalog = catalog
        self._ops = {o.id: (o.basis, o.support) for o in gc.operators}
        self._cache: dict = {}

    def __call__(self, a: Shape, b: Shape) -> bool:
        if a.operator_id > b.operator_id:
            a, b = b, a
        key = (a, b)
        hit = self._cache.get(key)
        if hit is None:
            hit = incompatible(a, b, self._ops[a.operator_id], self._ops[b.operator_id])
            self._cache[key] = hit
        return hit

    def conflicting_pairs(self) -> list:
        """All incompatible ((i, p), (j, q)) pairs with i < j."""
        by_qubit: dict = {}
        flat = []
        for i, lst in self.catalog.items():
            for p, s in enumerate(lst):
                flat.append((i, p, s))
                for q in s.qubits:
                    by_qubit.setdefault(q, []).append(len(flat) - 1)
        out = []
        for k, (i, p, s) in enumerate(flat):
            near = sorted({m for q in s.qubits for m in by_qubit[q] if m > k})
            for m in near:
                j, r, t = flat[m]
                if j != i and self(s, t):
                    out.append(((i, p), (j, r)) if i < j else ((j, r), (i, p)))
        return sorted(out)


def stretches(victim_basis: str, victim_support, s: Shape) -> bool:
    """Whether the crossbeam of ``s`` drags victim-detectable errors into its support.

    X errors travel control to target and trip Z-type checks; Z errors travel
    target to control and trip X-type checks.  Only the second-layer gate
    counts: first-layer legs are undone by the mirrored half of the block,
    while the crossbeam sits next to the reset and leaves its spread behind.
    """
    sup = victim_support
    for c, t in s.layer2:
        if (c in sup) == (t in sup):
            continue
        if victim_basis == "Z" and t in sup:
            return True
        if victim_basis == "X" and c in sup:
            return True
    return False


# --- canonical schedule ---------------------------------------------------------

@dataclass(frozen=True)
class CanonicalFace:
    """How the dropout-free two-board schedule measures one face."""

    basis: str
    face: Coord
    phase: int  # 0: face measured in even boards, 1: odd boards
    root: Coord
    layer1: tuple
    layer2: tuple


def canonical_faces(patch: PatchSpec) -> dict:
    """``(basis, face) -> CanonicalFace`` for the standard rotated round.

    Running the standard round backwards from mid-cycle (layers 2 then 1)
    collapses one face onto each measure qubit; running it forwards (layers 3
    then 4) collapses the other.  These are the two canonical boards.
    """
    from .lattice import mid_cycle_operators

    layers = [patch.cnot_layer(k) for k in range(4)]
    code = mid_cycle_operators(patch)
    out = {}
    for op in code.operators:
        sup = op.support
        inside = [tuple(g for g in lay if g[0] in sup and g[1] in sup) for lay in layers]
        for phase, (first, second) in enumerate(((inside[1], inside[0]), (inside[2], inside[3]))):
            img = propagate(css_to_sparse(op.basis, sup), (first, second))
            if len(img) == 1:
                (root,) = img
                if patch.is_measure(root) and is_single_qubit(img, root, op.basis):
                    out[(op.basis, op.face)] = CanonicalFace(
                        op.basis, op.face, phase, Coord(*root),
                        tuple(sorted(first)), tuple(sorted(second)))
                    break
        else:
            raise ShapeError(f"face {op.face} has no canonical measurement")
    return out
