import pytest

from luciopt import DropoutConfig, build_gauge_code, build_patch, enumerate_shapes, mid_cycle_operators
from luciopt._pauli import MidCycleOperator
from luciopt.shapes import build_catalog, canonical_faces, incompatible, measures, stretches

from conftest import pauli_image, shape_oracle


def _ops_by_weight():
    p = build_patch(3)
    ops = mid_cycle_operators(p).operators
    w4 = next(o for o in ops if len(o.support) == 4)
    w2 = next(o for o in ops if len(o.support) == 2)
    q = sorted(w4.support)[0]
    w3 = MidCycleOperator(99, w4.basis, frozenset(w4.support - {q}), w4.face)
    w1 = MidCycleOperator(98, w4.basis, frozenset([q]), w4.face)
    return p, {4: w4, 3: w3, 2: w2, 1: w1}


@pytest.mark.parametrize("w", [4, 3, 2, 1])
def test_unrestricted_enumeration_matches_oracle(w):
    p, ops = _ops_by_weight()
    op = ops[w]
    got = {(s.measure_qubit, frozenset(s.layer1), frozenset(s.layer2))
           for s in enumerate_shapes(op, patch=p, restrict=False)}
    assert got == shape_oracle(op.basis, op.support)


def test_restriction_keeps_measure_roots_only():
    p, ops = _ops_by_weight()
    for op in ops.values():
        full = enumerate_shapes(op, patch=p, restrict=False)
        kept = enumerate_shapes(op, patch=p)
        assert set(kept) == {s for s in full if p.is_measure(s.measure_qubit)}


def test_every_catalog_shape_measures_its_operator():
    p = build_patch(5)
    from luciopt import sample_dropout
    gc = build_gauge_code(p, sample_dropout(p, 0.03, 0.03, 1))
    cat = build_catalog(gc)
    for o in gc.operators:
        assert cat[o.id], o
        for s in cat[o.id]:
            assert measures(s, o.basis, o.support)
            assert pauli_image(o.basis, o.support, s.layers) == {s.measure_qubit}


def test_broken_coupler_removes_shapes():
    p = build_patch(3)
    op = next(o for o in mid_cycle_operators(p).operators if len(o.support) == 4)
    a, b = next((a, b) for a in sorted(op.support) for b in sorted(op.support)
                if abs(a[0] - b[0]) == 1 and abs(a[1] - b[1]) == 1)
    cfg = DropoutConfig(3, set(), {(a, b)})
    shapes = enumerate_shapes(op, cfg=cfg, patch=p, restrict=False)
    assert shapes
    for s in shapes:
        assert all({a, b} != set(g) for g in s.gates)


def test_incompatibility_is_symmetric_and_catches_shared_qubit():
    gc = build_gauge_code(3)
    cat = build_catalog(gc)
    ops = {o.id: o for o in gc.operators}
    items = [(s, (ops[i].basis, ops[i].support)) for i, lst in cat.items() for s in lst]
    clash = 0
    for s, o in items[:40]:
        for u, v in items[:40]:
            if s.operator_id == u.operator_id:
                continue
            assert incompatible(s, u, o, v) == incompatible(u, s, v, o)
            if s.measure_qubit == u.measure_qubit:
                assert incompatible(s, u, o, v)
                clash += 1
    assert clash


def test_canonical_faces_follow_the_standard_round():
    p = build_patch(5)
    layers = [set(p.cnot_layer(k)) for k in range(4)]
    faces = canonical_faces(p)
    assert len(faces) == len(mid_cycle_operators(p).operators)
    for f in faces.values():
        first, second = ((1, 0), (2, 3))[f.phase]
        assert set(f.layer1) <= layers[first]
        assert set(f.layer2) <= layers[second]
        assert p.is_measure(f.root)


def test_stretch_needs_a_crossbeam_touching_the_victim():
    gc = build_gauge_code(3)
    cat = build_catalog(gc)
    ops = gc.operators
    for o in ops:
        for s in cat[o.id]:
            for v in ops:
                if stretches(v.basis, v.support, s):
                    touched = {q for g in s.layer2 for q in g}
                    assert touched & v.support
