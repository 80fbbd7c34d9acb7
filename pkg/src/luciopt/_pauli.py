"""Sparse CSS Pauli operators and CNOT conjugation.

Every operator handled by the compiler is CSS: a single basis letter plus a
set of qubits. General (mixed) Paulis only show up while pushing operators
through CNOT circuits, where a dict ``qubit -> (x, z)`` is used.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

Coord = tuple  # (x, y); re-exported properly by ``lattice``

BASES = ("X", "Z")


def other_basis(basis: str) -> str:
    return "Z" if basis == "X" else "X"


@dataclass(frozen=True, order=True)
class MidCycleOperator:
    """A stabilizer or gauge operator of the mid-cycle code.

    ``face`` is the centre of the diamond (2x2 plaquette in the mid-cycle
    picture) the operator was cut from; it is what the shape catalog uses to
    recover the canonical measurement circuit.
    """

    id: int
    basis: str
    support: frozenset = field(compare=False)
    face: tuple = field(compare=False)
    kind: str = field(default="stabilizer", compare=False)
    region_id: int | None = field(default=None, compare=False)

    @property
    def weight(self) -> int:
        return len(self.support)

    def commutes_with(self, other: "MidCycleOperator") -> bool:
        return commutes(self.basis, self.support, other.basis, other.support)


def commutes(basis_a: str, support_a, basis_b: str, support_b) -> bool:
    if basis_a == basis_b:
        return True
    return len(set(support_a) & set(support_b)) % 2 == 0


def css_to_sparse(basis: str, support: Iterable) -> dict:
    bit = (1, 0) if basis == "X" else (0, 1)
    return {q: bit for q in support}


def propagate(pauli: Mapping, layers: Iterable[Iterable[tuple]]) -> dict:
    """Conjugate ``pauli`` by CNOT layers applied in order.

    Each gate is ``(control, target)``.  X flows control -> target and
    Z flows target -> control.  CNOT is self-inverse, so the same routine
    pulls an operator backwards when the layers are given in reverse.
    """
    p = dict(pauli)
    for layer in layers:
        for c, t in layer:
            xc, zc = p.get(c, (0, 0))
            xt, zt = p.get(t, (0, 0))
            xt ^= xc
            zc ^= zt
            if xc or zc:
                p[c] = (xc, zc)
            else:
                p.pop(c, None)
            if xt or zt:
                p[t] = (xt, zt)
            else:
                p.pop(t, None)
    return p


def is_single_qubit(pauli: Mapping, qubit, basis: str) -> bool:
    want = (1, 0) if basis == "X" else (0, 1)
    return len(pauli) == 1 and pauli.get(qubit) == want


def sparse_commutes(a: Mapping, b: Mapping) -> bool:
    parity = 0
    for q, (xa, za) in a.items():
        if q in b:
            xb, zb = b[q]
            parity ^= (xa & zb) ^ (za & xb)
    return parity == 0
