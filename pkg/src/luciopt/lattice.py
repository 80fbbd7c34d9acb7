"""Rotated surface-code patches, dropout configurations and the mid-cycle code.

Coordinates follow the usual rotated layout: data qubits sit on odd/odd
points of ``[0, 2d]^2`` and measure qubits on even/even points, so the
qubit role is just the parity of the coordinate.  Couplers join diagonal
neighbours.  In the mid-cycle picture each stabilizer is a diamond centred
on a mixed-parity point: ``(odd, even)`` centres carry X faces and
``(even, odd)`` centres carry Z faces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from ._pauli import MidCycleOperator, css_to_sparse, propagate


class Coord(NamedTuple):
    x: int
    y: int

    def __add__(self, other):  # type: ignore[override]
        return Coord(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Coord(self.x - other[0], self.y - other[1])


DIAGONALS = ((1, 1), (1, -1), (-1, 1), (-1, -1))

# Standard hook-safe CNOT orders (offset from measure qubit to data qubit).
X_ORDER = ((1, 1), (1, -1), (-1, 1), (-1, -1))
Z_ORDER = ((1, 1), (-1, 1), (1, -1), (-1, -1))


def coupler(a, b) -> tuple:
    """Canonical (lexicographically sorted) representation of a coupler."""
    a, b = Coord(*a), Coord(*b)
    return (a, b) if a <= b else (b, a)


def is_measure_site(q) -> bool:
    return q[0] % 2 == 0 and q[1] % 2 == 0


def face_basis(center) -> str:
    return "X" if center[0] % 2 == 1 else "Z"


def diamond(center) -> tuple:
    cx, cy = center
    return (Coord(cx - 1, cy), Coord(cx, cy - 1), Coord(cx + 1, cy), Coord(cx, cy + 1))


@dataclass(frozen=True)
class PatchSpec:
    """Geometry of a distance-``d`` rotated surface-code patch."""

    d: int
    roles: dict = field(compare=False, repr=False)

    @cached_property
    def qubits(self) -> tuple:
        return tuple(sorted(self.roles))

    @cached_property
    def data_qubits(self) -> tuple:
        return tuple(q for q in self.qubits if self.roles[q] == "data")

    @cached_property
    def measure_qubits(self) -> tuple:
        return tuple(q for q in self.qubits if self.roles[q] != "data")

    @cached_property
    def couplers(self) -> tuple:
        out = set()
        for m in self.measure_qubits:
            for off in DIAGONALS:
                q = m + off
                if q in self.roles:
                    out.add(coupler(m, q))
        return tuple(sorted(out))

    @cached_property
    def _nbrs(self) -> dict:
        nb = {q: [] for q in self.qubits}
        for a, b in self.couplers:
            nb[a].append(b)
            nb[b].append(a)
        return {q: tuple(sorted(v)) for q, v in nb.items()}

    def neighbors(self, q) -> tuple:
        return self._nbrs[Coord(*q)]

    def is_data(self, q) -> bool:
        return self.roles.get(Coord(*q)) == "data"

    def is_measure(self, q) -> bool:
        return self.roles.get(Coord(*q)) in ("X", "Z")

    def on_boundary(self, q) -> bool:
        return len(self.neighbors(q)) < 4

    def cnot_layer(self, k: int) -> tuple:
        """Gates of layer ``k`` (0..3) of the standard rotated-code round."""
        gates = []
        for m in self.measure_qubits:
            kind = self.roles[m]
            off = (X_ORDER if kind == "X" else Z_ORDER)[k]
            q = m + off
            if q in self.roles:
                gates.append((m, q) if kind == "X" else (q, m))
        return tuple(sorted(gates))

    def rotated_stabilizers(self) -> list:
        """``(basis, support)`` of the start-of-cycle plaquettes."""
        out = []
        for m in self.measure_qubits:
            sup = frozenset(q for q in self.neighbors(m))
            out.append((self.roles[m], sup))
        return out

    def start_cycle_generators(self) -> list:
        """Start-of-cycle generators in the single / plaquette-times-single basis.

        Each measure qubit contributes its reset stabilizer (weight one) and
        that stabilizer multiplied into its plaquette (weight five in the
        bulk).  Returned as ``(measure_qubit, basis, support)``.
        """
        out = []
        for m in self.measure_qubits:
            b = self.roles[m]
            out.append((m, b, frozenset([m])))
            out.append((m, b, frozenset([m, *self.neighbors(m)])))
        return out


def build_patch(d: int) -> PatchSpec:
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool):
        raise TypeError(f"distance must be an integer, got {d!r}")
    d = int(d)
    if d < 3 or d % 2 == 0:
        raise ValueError(f"distance must be odd and >= 3, got {d}")
    roles = {}
    for x in range(1, 2 * d, 2):
        for y in range(1, 2 * d, 2):
            roles[Coord(x, y)] = "data"
    for x in range(0, 2 * d + 1, 2):
        for y in range(0, 2 * d + 1, 2):
            kind = "X" if ((x + y) // 2) % 2 == 0 else "Z"
            interior = 0 < x < 2 * d and 0 < y < 2 * d
            top_bottom = y in (0, 2 * d) and 0 < x < 2 * d
            left_right = x in (0, 2 * d) and 0 < y < 2 * d
            if interior or (top_bottom and kind == "X") or (left_right and kind == "Z"):
                roles[Coord(x, y)] = kind
    return PatchSpec(d=d, roles=roles)


@dataclass(frozen=True)
class DropoutConfig:
    """Broken qubits and couplers of one device instance."""

    d: int
    broken_qubits: frozenset = frozenset()
    broken_couplers: frozenset = frozenset()
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "broken_qubits", frozenset(Coord(*q) for q in self.broken_qubits))
        object.__setattr__(
            self, "broken_couplers", frozenset(coupler(a, b) for a, b in self.broken_couplers)
        )

    def validate(self, patch: PatchSpec) -> None:
        if patch.d != self.d:
            raise ValueError(f"config is for d={self.d}, patch has d={patch.d}")
        bad = [q for q in self.broken_qubits if q not in patch.roles]
        if bad:
            raise ValueError(f"broken qubits not in patch: {sorted(bad)}")
        known = set(patch.couplers)
        bad = [c for c in self.broken_couplers if c not in known]
        if bad:
            raise ValueError(f"broken couplers not in patch: {sorted(bad)}")

    def qubit_ok(self, q) -> bool:
        return Coord(*q) not in self.broken_qubits

    def coupler_ok(self, a, b) -> bool:
        a, b = Coord(*a), Coord(*b)
        if a in self.broken_qubits or b in self.broken_qubits:
            return False
        return coupler(a, b) not in self.broken_couplers

    @property
    def is_empty(self) -> bool:
        return not self.broken_qubits and not self.broken_couplers

    def with_broken_qubits(self, extra: Iterable) -> "DropoutConfig":
        return DropoutConfig(self.d, self.broken_qubits | {Coord(*q) for q in extra},
                             self.broken_couplers, self.seed)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "broken_qubits": [list(q) for q in sorted(self.broken_qubits)],
            "broken_couplers": [[list(a), list(b)] for a, b in sorted(self.broken_couplers)],
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, obj: dict) -> "DropoutConfig":
        try:
            d = obj["d"]
            qs = [Coord(int(q[0]), int(q[1])) for q in obj.get("broken_qubits", [])]
            cs = [(tuple(a), tuple(b)) for a, b in obj.get("broken_couplers", [])]
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ValueError(f"malformed dropout config: {exc}") from exc
        return cls(d=int(d), broken_qubits=frozenset(qs), broken_couplers=frozenset(cs),
                   seed=obj.get("seed"))

    @classmethod
    def from_json(cls, text: str) -> "DropoutConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid dropout config JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ValueError("dropout config JSON must be an object")
        return cls.from_dict(obj)


def sample_dropout(patch: PatchSpec, qubit_rate: float, coupler_rate: float,
                   seed: int) -> DropoutConfig:
    """I.i.d. Bernoulli dropout of every qubit and every coupler."""
    for name, rate in (("qubit_rate", qubit_rate), ("coupler_rate", coupler_rate)):
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {rate}")
    rng = np.random.default_rng(seed)
    qdraw = rng.random(len(patch.qubits))
    cdraw = rng.random(len(patch.couplers))
    broken_q = frozenset(q for q, u in zip(patch.qubits, qdraw) if u < qubit_rate)
    broken_c = frozenset(c for c, u in zip(patch.couplers, cdraw) if u < coupler_rate)
    return DropoutConfig(patch.d, broken_q, broken_c, seed)


@dataclass(frozen=True)
class MidCycleCode:
    patch: PatchSpec
    operators: tuple

    @property
    def qubits(self) -> tuple:
        return self.patch.qubits


def _face_of(basis: str, support) -> Coord:
    pts = sorted(support)
    for c in sorted({Coord(q.x + dx, q.y + dy) for q in pts
                     for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))}):
        if face_basis(c) == basis and set(pts) <= set(diamond(c)):
            return c
    raise AssertionError(f"{basis} operator on {pts} is not a face fragment")


def mid_cycle_operators(patch: PatchSpec) -> MidCycleCode:
    """Dropout-free mid-cycle stabilizers.

    Each start-of-cycle generator is pushed through the first two CNOT
    layers of the standard round; the images are the diamond faces of the
    mid-cycle (unrotated) code.
    """
    layers = (patch.cnot_layer(0), patch.cnot_layer(1))
    ops = []
    for _m, basis, support in patch.start_cycle_generators():
        img = propagate(css_to_sparse(basis, support), layers)
        want = (1, 0) if basis == "X" else (0, 1)
        assert all(v == want for v in img.values())
        sup = frozenset(Coord(*q) for q in img)
        ops.append((basis, sup))
    ops.sort(key=lambda o: (sorted(o[1]), o[0]))
    out = tuple(
        MidCycleOperator(id=i, basis=b, support=s, face=_face_of(b, s))
        for i, (b, s) in enumerate(ops)
    )
    return MidCycleCode(patch=patch, operators=out)
