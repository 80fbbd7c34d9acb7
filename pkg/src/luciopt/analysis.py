"""Circuits, detectors and the statistics used to compare schedules.

A diagram compiles to a memory experiment written in the mid-cycle frame:
every qubit of the surviving region starts in the memory basis, each board
runs its shapes forwards, measures and resets the roots and runs the shapes
backwards, and the experiment ends with a transversal readout.

Detectors are found semantically.  A CSS stabilizer tableau (destabilizers
included) carries outcome signs as XORs of symbols; a random measurement
creates a symbol, a deterministic one yields a detector made of itself and
the symbols its prediction uses.  After a deterministic measurement the
measured Pauli becomes a tableau row signed by the new outcome, which keeps
detectors local in time (consecutive measurements of one operator, or a
superstabilizer's gauge outcomes).

Volumes count single-Pauli error sites: after every layer, for every qubit,
each of X, Y, Z that flips the detector counts once.
"""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._pauli import other_basis
from .gauge import bare_logicals
from .heuristic import LuciDiagram, validate_diagram

PAULIS = ("X", "Y", "Z")


class AnalysisError(RuntimeError):
    """A compiled schedule behaved in a way a valid diagram cannot."""


@dataclass(frozen=True)
class Layer:
    kind: str  # "cx" | "m" | "r"
    items: tuple  # (control, target) index pairs, or qubit indices
    basis: str = ""  # for m / r
    board: int = -1  # absolute board number, -1 for init / readout
    tag: str = ""


@dataclass
class Circuit:
    qubits: tuple  # coordinates; position is the qubit index
    layers: list
    T: int
    cycles: int
    memory_basis: str
    measurements: list = field(default_factory=list)  # (layer index, qubit index, basis, board)
    observable: tuple = ()  # measurement indices of the logical readout
    flip: tuple = ()  # qubit indices of an opposite-basis logical (start-state symbol)

    @property
    def index(self) -> dict:
        return {q: k for k, q in enumerate(self.qubits)}

    def gate_count(self) -> int:
        return sum(len(L.items) for L in self.layers if L.kind == "cx")

    def board_measurements(self, board: int) -> list:
        return [m for m in self.measurements if m[3] == board]


@dataclass(frozen=True)
class Detector:
    id: int
    basis: str
    measurements: tuple  # measurement indices, ascending
    sensitive_locations: frozenset  # (slot, qubit index, Pauli)

    @property
    def volume(self) -> int:
        return len(self.sensitive_locations)


# --- compilation ----------------------------------------------------------------

def compile_circuit(diag: LuciDiagram, cycles: int = 1, memory_basis: str = "Z",
                    check: bool = True) -> Circuit:
    """Unroll ``cycles`` repetitions of the diagram into explicit layers."""
    if cycles < 1:
        raise ValueError("cycles must be at least 1")
    if memory_basis not in ("X", "Z"):
        raise ValueError("memory basis must be X or Z")
    if check:
        bad = validate_diagram(diag)
        if bad:
            raise AnalysisError(f"invalid diagram: {bad[0]}")
    qubits = diag.code.qubits
    idx = {q: k for k, q in enumerate(qubits)}
    layers = [Layer("r", tuple(range(len(qubits))), memory_basis, -1, "init")]
    meas = []
    for cyc in range(cycles):
        for t, board in enumerate(diag.boards):
            b = cyc * diag.T + t
            l1 = sorted({g for s in board.values() for g in s.layer1})
            l2 = sorted({g for s in board.values() for g in s.layer2})
            cx1 = tuple((idx[c], idx[u]) for c, u in l1)
            cx2 = tuple((idx[c], idx[u]) for c, u in l2)
            by_basis: dict = {}
            for s in board.values():
                by_basis.setdefault(s.basis, []).append(idx[s.measure_qubit])
            layers.append(Layer("cx", cx1, "", b, "L1"))
            layers.append(Layer("cx", cx2, "", b, "L2"))
            for basis in sorted(by_basis):
                qs = tuple(sorted(by_basis[basis]))
                for q in qs:
                    meas.append((len(layers), q, basis, b))
                layers.append(Layer("m", qs, basis, b))
            for basis in sorted(by_basis):
                layers.append(Layer("r", tuple(sorted(by_basis[basis])), basis, b))
            layers.append(Layer("cx", cx2, "", b, "L2"))
            layers.append(Layer("cx", cx1, "", b, "L1"))
    final = tuple(range(len(qubits)))
    start = len(meas)
    for q in final:
        meas.append((len(layers), q, memory_basis, -1))
    layers.append(Layer("m", final, memory_basis, -1, "readout"))
    logical = min(bare_logicals(diag.code, memory_basis), key=lambda s: (len(s), sorted(s)))
    partner = [s for s in bare_logicals(diag.code, other_basis(memory_basis))
               if len(s & logical) % 2]
    if not partner:
        raise AnalysisError("no logical pair to read out")
    obs = tuple(start + idx[q] for q in sorted(logical))
    flip = tuple(sorted(idx[q] for q in min(partner, key=len)))
    circ = Circuit(qubits, layers, diag.T, cycles, memory_basis, meas, obs, flip)
    for L in layers:
        used = [q for g in L.items for q in g] if L.kind == "cx" else list(L.items)
        if len(used) != len(set(used)):
            raise AnalysisError(f"qubit used twice in a {L.kind} layer of board {L.board}")
    _sets, lam, ok = _detect(circ)
    if lam is None:
        raise AnalysisError("the schedule destroys the logical qubit")
    if not ok:
        # resets of opposite-basis roots on this representative scramble its
        # final readout; read the logical through the exposing relation instead
        circ.observable = lam
    return circ


# --- symbolic CSS tableau ---------------------------------------------------------------

class _Tableau:
    """Pure CSS stabilizer state with destabilizers and symbolic signs.

    Row ``r`` holds a stabilizer of type ``kind[r]`` and its destabilizer of
    the other type; ``sign[r]`` is a Python int used as a bitset of symbols.
    """

    def __init__(self, n: int, basis: str):
        self.n = n
        self.S = np.eye(n, dtype=bool)
        self.D = np.eye(n, dtype=bool)
        self.kind = np.array([basis == "X"] * n)  # True: X-type stabilizer
        self.sign = [0] * n

    def cx(self, c: int, t: int) -> None:
        xs = self.kind  # rows whose stabilizer is X-type
        zs = ~self.kind
        # X-type rows: x_t ^= x_c ; Z-type rows: z_c ^= z_t
        self.S[xs, t] ^= self.S[xs, c]
        self.S[zs, c] ^= self.S[zs, t]
        # destabilizers carry the opposite type
        self.D[zs, t] ^= self.D[zs, c]
        self.D[xs, c] ^= self.D[xs, t]

    def measure(self, q: int, basis: str, fresh: int):
        """Returns (deterministic, value bitset).

        A deterministic outcome leaves the measured Pauli as one tableau row
        whose sign is ``fresh``, so later predictions refer to this outcome.
        """
        want_x = basis == "X"
        # stabilizers anticommuting with the measured Pauli are of the other type
        anti = np.nonzero(self.S[:, q] & (self.kind != want_x))[0]
        if anti.size == 0:
            rows = np.nonzero(self.D[:, q] & (self.kind == want_x))[0]
            val = 0
            for r in rows:
                val ^= self.sign[r]
            if rows.size:
                r0 = rows[0]
                for r in rows:
                    if r == r0:
                        continue
                    self.S[r0] ^= self.S[r]
                    self.D[r] ^= self.D[r0]
                self.sign[r0] = fresh
            return True, val
        p = anti[0]
        for r in anti[1:]:
            self.S[r] ^= self.S[p]
            self.sign[r] ^= self.sign[p]
        danti = np.nonzero(self.D[:, q] & (self.kind == want_x))[0]
        for r in danti:
            self.D[r] ^= self.S[p]
        self.D[p] = self.S[p]
        self.S[p] = False
        self.S[p, q] = True
        self.kind[p] = want_x
        self.sign[p] = fresh
        return False, fresh

    def reset(self, q: int, basis: str, zero: int, scratch: int) -> None:
        """Reset ``q``; its row afterwards is signed by the known-zero ``zero``.

        ``scratch`` names the discarded outcome when it is random.
        """
        det, val = self.measure(q, basis, scratch)
        want_x = basis == "X"
        same = np.nonzero(self.S[:, q] & (self.kind == want_x))[0]
        r0 = next(r for r in same if self.S[r].sum() == 1)
        if det:
            self.sign[r0] = val
        for r in same:
            if r != r0:
                self.S[r] ^= self.S[r0]
                self.sign[r] ^= self.sign[r0]
                self.D[r0] ^= self.D[r]
        self.sign[r0] = zero

    def substitute(self, sym: int, expr: int) -> None:
        """Replace symbol bit ``sym`` by the bitset ``expr`` in every sign."""
        bit = 1 << sym
        for r in range(self.n):
            if self.sign[r] & bit:
                self.sign[r] ^= bit ^ expr


def detectors(circ: Circuit, with_locations: bool = True) -> list:
    """All detectors of the circuit with their sensitive error sites."""
    sets, _lam, obs_ok = _detect(circ)
    if not obs_ok:
        raise AnalysisError("logical readout is not deterministic")
    basis_of = [m[2] for m in circ.measurements]
    if not with_locations:
        return [Detector(k, _det_basis(s, basis_of), s, frozenset()) for k, s in enumerate(sets)]
    locs = sensitive_locations(circ, sets)
    return [Detector(k, _det_basis(s, basis_of), s, frozenset(locs[k])) for k, s in enumerate(sets)]


def _det_basis(meas, basis_of) -> str:
    bs = {basis_of[m] for m in meas}
    if len(bs) != 1:
        raise AnalysisError(f"detector mixes bases: {meas}")
    return bs.pop()


def _detect(circ: Circuit):
    """Detector measurement sets, the exposing relation of the logical bit,
    and whether the declared readout matches it up to detectors.

    The start state carries one symbolic bit ``lam``: a logical flip of the
    opposite basis applied with unknown probability.  The measurement that
    first exposes ``lam`` is the logical readout and is not a detector.

    Every reset (and the start state) contributes symbols known to be zero,
    stamped with the time of the reset.  Each new relation is reduced against
    the earlier ones so that its oldest member is as recent as possible; the
    zero symbols are then dropped.
    """
    n = len(circ.qubits)
    tab = _Tableau(n, circ.memory_basis)
    nm = len(circ.measurements)
    lam = nm
    flip = _flip_support(circ)
    zero = [nm + 1]  # next free zero symbol
    order: dict = {}  # symbol -> position in time

    def stamp(sym):
        order[sym] = len(order)

    for r in range(n):
        stamp(zero[0])
        tab.sign[r] = (1 << zero[0]) | ((1 << lam) if r in flip else 0)
        zero[0] += 1
    out = []
    echelon: dict = {}  # lowest time position -> scratch-free relation
    pending: dict = {}  # highest scratch position -> relation still holding it
    scratch_mask = 0
    lam_set = None

    def to_positions(val, sym):
        v = 1 << order[sym]
        for b in range(val.bit_length()):
            if (val >> b) & 1:
                v ^= 1 << order[b]
        return v

    def drop_scratch(v):
        """Cancel discarded outcomes against earlier relations; None if some remain."""
        while v & scratch_mask:
            top = (v & scratch_mask).bit_length() - 1
            if top not in pending:
                pending[top] = v
                return None
            v ^= pending[top]
        return v

    def local(v):
        # make the oldest member as recent as possible
        while v:
            low = (v & -v).bit_length() - 1
            if low not in echelon:
                break
            v ^= echelon[low]
        echelon[(v & -v).bit_length() - 1] = v
        return v

    def measured(v):
        return tuple(sorted(back[i] for i in range(v.bit_length())
                            if (v >> i) & 1 and back.get(i) is not None))

    back: dict = {}
    k = 0
    for L in circ.layers:
        if L.kind == "cx":
            for c, t in L.items:
                tab.cx(c, t)
        elif L.kind == "r":
            if L.tag == "init":
                continue
            for q in L.items:
                z, scratch = zero[0], zero[0] + 1
                zero[0] += 2
                stamp(z)
                stamp(scratch)
                scratch_mask |= 1 << order[scratch]
                tab.reset(q, L.basis, 1 << z, 1 << scratch)
        else:
            for q in L.items:
                stamp(k)
                back[order[k]] = k
                det, val = tab.measure(q, L.basis, 1 << k)
                if det:
                    if (val >> lam) & 1:
                        if lam_set is not None:
                            raise AnalysisError("logical bit exposed twice")
                        rest = val ^ (1 << lam)
                        v = drop_scratch(to_positions(rest, k))
                        if v is None:
                            raise AnalysisError("logical readout depends on a discarded outcome")
                        lam_set = measured(v)
                        tab.substitute(lam, rest | (1 << k))
                    else:
                        v = drop_scratch(to_positions(val, k))
                        if v is not None:
                            out.append(measured(local(v)))
                k += 1
    if lam_set is None:
        return out, None, False
    # the readout must equal the exposed logical up to detectors
    ok = _in_span([_mask(s) for s in out], _mask(circ.observable) ^ _mask(lam_set))
    return out, lam_set, ok


def _flip_support(circ: Circuit) -> set:
    """Qubit indices of the symbolic logical flip (opposite-basis logical)."""
    return set(circ.flip)


def _mask(ms) -> int:
    v = 0
    for m in ms:
        v ^= 1 << m
    return v


def _in_span(rows, target: int) -> bool:
    basis: dict = {}
    for r in rows:
        while r:
            h = r.bit_length() - 1
            if h in basis:
                r ^= basis[h]
            else:
                basis[h] = r
                break
    while target:
        h = target.bit_length() - 1
        if h not in basis:
            return False
        target ^= basis[h]
    return True


# --- error sensitivity ----------------------------------------------------------------


def sensitive_locations(circ: Circuit, sets) -> list:
    """Per detector, the (slot, qubit, Pauli) sites that flip it.

    Propagates every detector's sensitivity backwards through the circuit
    at once: measuring adds the measured Pauli, resetting clears the qubit,
    CNOTs conjugate.
    """
    n = len(circ.qubits)
    nd = len(sets)
    X = np.zeros((nd, n), dtype=bool)
    Z = np.zeros((nd, n), dtype=bool)
    by_meas: dict = {}
    for d, s in enumerate(sets):
        for m in s:
            by_meas.setdefault(m, []).append(d)
    meas_at: dict = {}
    for j, (li, q, basis, _b) in enumerate(circ.measurements):
        meas_at.setdefault(li, []).append((j, q, basis))
    out = [[] for _ in range(nd)]
    for li in range(len(circ.layers) - 1, -1, -1):
        # state just after layer li
        live = np.nonzero((X | Z).any(axis=1))[0]
        if live.size:
            xs, zs = X[live], Z[live]
            for row, d in enumerate(live):
                for q in np.nonzero(xs[row] | zs[row])[0]:
                    x, z = xs[row, q], zs[row, q]
                    # a Pauli flips the detector iff it anticommutes with (x, z)
                    for p, (ex, ez) in (("X", (1, 0)), ("Y", (1, 1)), ("Z", (0, 1))):
                        if (ex & z) ^ (ez & x):
                            out[d].append((li, int(q), p))
        L = circ.layers[li]
        if L.kind == "cx":
            for c, t in reversed(L.items):
                X[:, t] ^= X[:, c]
                Z[:, c] ^= Z[:, t]
        elif L.kind == "r":
            for q in L.items:
                X[:, q] = False
                Z[:, q] = False
        else:
            for j, q, basis in meas_at.get(li, ()):
                for d in by_meas.get(j, ()):
                    if basis == "Z":
                        Z[d, q] ^= True
                    else:
                        X[d, q] ^= True
    return out


def flipped_measurements(circ: Circuit, slot: int, qubit: int, pauli: str) -> set:
    """Forward simulation of one error inserted just after layer ``slot``."""
    x = np.zeros(len(circ.qubits), dtype=bool)
    z = np.zeros(len(circ.qubits), dtype=bool)
    x[qubit] = pauli in ("X", "Y")
    z[qubit] = pauli in ("Z", "Y")
    flips = set()
    meas_idx: dict = {}
    for j, (li, q, basis, _b) in enumerate(circ.measurements):
        meas_idx[(li, q)] = j
    for li in range(slot + 1, len(circ.layers)):
        L = circ.layers[li]
        if L.kind == "cx":
            for c, t in L.items:
                x[t] ^= x[c]
                z[c] ^= z[t]
        elif L.kind == "r":
            for q in L.items:
                x[q] = z[q] = False
        else:
            for q in L.items:
                if (L.basis == "Z" and x[q]) or (L.basis == "X" and z[q]):
                    flips.add(meas_idx[(li, q)])
    return flips


def brute_force_volumes(circ: Circuit, sets) -> list:
    """Detector volumes by inserting every single-Pauli error (oracle)."""
    masks = [_mask(s) for s in sets]
    vol = [0] * len(sets)
    for slot in range(len(circ.layers)):
        for q in range(len(circ.qubits)):
            for p in PAULIS:
                fm = _mask(flipped_measurements(circ, slot, q, p))
                if not fm:
                    continue
                for d, m in enumerate(masks):
                    if bin(fm & m).count("1") % 2:
                        vol[d] += 1
    return vol


# --- statistics ---------------------------------------------------------------------

def volume_stats(dets) -> tuple:
    """(mean volume, reverse CDF as [(threshold, count of detectors >= threshold)])."""
    vols = [d.volume if isinstance(d, Detector) else int(d) for d in dets]
    if not vols:
        raise ValueError("no detectors")
    mean = sum(vols) / len(vols)
    c = Counter(vols)
    table = []
    remaining = len(vols)
    for v in sorted(c):
        table.append((v, remaining))
        remaining -= c[v]
    return mean, table


def measurement_frequency_stats(diag: LuciDiagram) -> dict:
    """Histogram of how many boards of one cycle measure each operator."""
    counts = diag.counts()
    hist = Counter(counts.values())
    n = len(counts)
    return {
        "operators": n,
        "histogram": dict(sorted(hist.items())),
        "fractions": {k: v / n for k, v in sorted(hist.items())},
    }


# --- minimum-weight paths -----------------------------------------------------------------

OBS = -1  # marks the logical readout inside a slice entry


def detector_slice(circ: Circuit, dets, slot: int, basis: str) -> dict:
    """qubit index -> frozenset of detector ids flipped by a ``basis`` error
    inserted just after layer ``slot``; ``OBS`` is included when the error
    also flips the logical readout."""
    out: dict = {q: set() for q in range(len(circ.qubits))}
    for d in dets:
        for (s, q, p) in d.sensitive_locations:
            if s == slot and p == basis:
                out[q].add(d.id)
    (obs,) = sensitive_locations(circ, [circ.observable])
    for (s, q, p) in obs:
        if s == slot and p == basis:
            out[q].add(OBS)
    return {q: frozenset(v) for q, v in out.items()}


def mid_cycle_slot(circ: Circuit, board: int | None = None) -> int:
    """Slot at the end of ``board`` (default: the board halfway through the run)."""
    if board is None:
        board = max(0, circ.cycles * circ.T // 2 - 1)
    last = max(i for i, L in enumerate(circ.layers) if L.board == board)
    return last


def _graph(slice_: dict) -> list:
    """Edges (u, v, qubit, flips_logical) on detector ids and the boundary 'B'.

    Qubits flipping more than two detectors are not graphlike and are left
    out; ``brute_force_min_paths`` has no such restriction.
    """
    edges = []
    for q in sorted(slice_):
        ds = sorted(x for x in slice_[q] if x != OBS)
        par = OBS in slice_[q]
        if not ds:
            if par:
                edges.append(("B", "B", q, True))
        elif len(ds) == 1:
            edges.append(("B", ds[0], q, par))
        elif len(ds) == 2:
            edges.append((ds[0], ds[1], q, par))
    return edges


def min_weight_paths(circ: Circuit, slice_: dict, basis: str) -> tuple:
    """(length, count) of shortest boundary-to-boundary error chains.

    Vertices are the slice's detectors plus the boundary; each qubit is an
    edge between the detectors its error flips (or the boundary).  A chain
    counts when it flips the logical readout, so the search runs over
    (vertex, parity) states and counts paths in the BFS layer DAG.
    ``(inf, 0)`` when no chain exists.
    """
    del circ, basis  # the slice already fixes both
    adj: dict = {}
    for u, v, _q, par in _graph(slice_):
        adj.setdefault(u, []).append((v, par))
        if u != v:
            adj.setdefault(v, []).append((u, par))
    start, goal = ("B", False), ("B", True)
    dist = {start: 0}
    ways = {start: 1}
    dq = deque([start])
    while dq:
        u = dq.popleft()
        if u == goal:
            continue
        for v, par in adj.get(u[0], ()):
            w = (v, u[1] ^ par)
            if w == start:
                continue
            if v == "B" and w != goal:
                continue
            if w not in dist:
                dist[w] = dist[u] + 1
                ways[w] = 0
                dq.append(w)
            if dist[w] == dist[u] + 1:
                ways[w] += ways[u]
    if goal not in dist:
        return float("inf"), 0
    n = dist[goal]
    # every chain of two or more edges was walked in both directions
    return n, ways[goal] if n == 1 else ways[goal] // 2


def brute_force_min_paths(circ: Circuit, slice_: dict, basis: str, max_len: int = 8) -> tuple:
    """Oracle for ``min_weight_paths``: smallest qubit sets that flip the
    logical readout and no detector, by exhaustive enumeration."""
    del circ, basis
    live = [q for q in sorted(slice_) if slice_[q]]
    for k in range(1, max_len + 1):
        found = 0
        for combo in combinations(live, k):
            acc: set = set()
            for q in combo:
                acc ^= slice_[q]
            if acc == {OBS}:
                found += 1
        if found:
            return k, found
    return float("inf"), 0


# --- export ---------------------------------------------------------------------------

SI1000 = {
    "cx": ("DEPOLARIZE2", 1.0),
    "idle": ("DEPOLARIZE1", 0.1),
    "m": ("flip", 5.0),
    "r": ("flip", 2.0),
    "mr_idle": ("DEPOLARIZE1", 2.0),
}


def export_stim(circ: Circuit, dets, p: float | None = None) -> str:
    """Line-oriented stabilizer-circuit text; SI1000 channels when ``p`` is set."""
    lines = []
    for k, (x, y) in enumerate(circ.qubits):
        lines.append(f"QUBIT_COORDS({x}, {y}) {k}")
    n = len(circ.qubits)
    all_q = set(range(n))
    nmeas = 0
    meas_pos = {}
    for L in circ.layers:
        if L.kind == "cx":
            flat = [q for g in L.items for q in g]
            if not flat:
                continue
            lines.append("CX " + " ".join(map(str, flat)))
            if p is not None:
                lines.append(f"DEPOLARIZE2[si1000]({p * SI1000['cx'][1]:.6g}) " + " ".join(map(str, flat)))
                idle = sorted(all_q - set(flat))
                if idle:
                    lines.append(f"DEPOLARIZE1[si1000]({p * SI1000['idle'][1]:.6g}) " + " ".join(map(str, idle)))
        elif L.kind == "r":
            op = "R" if L.basis == "Z" else "RX"
            lines.append(op + " " + " ".join(map(str, L.items)))
            if p is not None:
                err = "X_ERROR" if L.basis == "Z" else "Z_ERROR"
                lines.append(f"{err}[si1000]({p * SI1000['r'][1]:.6g}) " + " ".join(map(str, L.items)))
        else:
            op = "M" if L.basis == "Z" else "MX"
            if p is not None:
                err = "X_ERROR" if L.basis == "Z" else "Z_ERROR"
                lines.append(f"{err}[si1000]({p * SI1000['m'][1]:.6g}) " + " ".join(map(str, L.items)))
            lines.append(op + " " + " ".join(map(str, L.items)))
            for q in L.items:
                meas_pos[nmeas] = nmeas
                nmeas += 1
            if p is not None:
                idle = sorted(all_q - set(L.items))
                if idle:
                    lines.append(f"DEPOLARIZE1[si1000]({p * SI1000['mr_idle'][1]:.6g}) " + " ".join(map(str, idle)))
        lines.append("TICK")
    for d in dets:
        recs = " ".join(f"rec[{m - nmeas}]" for m in d.measurements)
        lines.append(f"DETECTOR {recs}")
    recs = " ".join(f"rec[{m - nmeas}]" for m in circ.observable)
    lines.append(f"OBSERVABLE_INCLUDE(0) {recs}")
    return "\n".join(lines) + "\n"


def report(diag: LuciDiagram, cycles: int = 2, memory_basis: str = "Z") -> dict:
    """Summary numbers used by the CLI ``analyze`` command."""
    circ = compile_circuit(diag, cycles, memory_basis)
    dets = detectors(circ)
    mean, table = volume_stats(dets)
    slot = mid_cycle_slot(circ)
    paths = {}
    for b in ("X", "Z"):
        sl = detector_slice(circ, dets, slot, b)
        length, count = min_weight_paths(circ, sl, b)
        paths[b] = {"length": length if length != float("inf") else None, "count": count}
    return {
        "detectors": len(dets),
        "mean_volume": mean,
        "volume_cdf": table,
        "min_weight_paths": paths,
        "measurement_frequency": measurement_frequency_stats(diag),
        "layers": len(circ.layers),
        "cnots": circ.gate_count(),
    }


def report_json(rep: dict) -> str:
    return json.dumps(rep, sort_keys=True, default=str)


__all__ = [
    "AnalysisError", "Circuit", "OBS", "Detector", "Layer", "brute_force_min_paths",
    "brute_force_volumes", "compile_circuit", "detector_slice", "detectors", "export_stim",
    "flipped_measurements", "measurement_frequency_stats", "mid_cycle_slot", "min_weight_paths",
    "report", "sensitive_locations", "volume_stats", "other_basis",
]
