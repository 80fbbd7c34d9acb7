import numpy as np
import pytest

from luciopt import DropoutConfig, build_gauge_code, build_patch, code_distance, sample_dropout
from luciopt.gauge import (NoLogicalError, PatchDestroyedError, bare_logicals, is_logical,
                           logical_witness)

W1_CFG = DropoutConfig(3, set(), {((2, 4), (3, 3)), ((2, 4), (3, 5))})


def gf2_rank(rows) -> int:
    m = np.array(rows, dtype=np.uint8) % 2
    r = 0
    for c in range(m.shape[1]):
        piv = next((i for i in range(r, m.shape[0]) if m[i, c]), None)
        if piv is None:
            continue
        m[[r, piv]] = m[[piv, r]]
        for i in range(m.shape[0]):
            if i != r and m[i, c]:
                m[i] ^= m[r]
        r += 1
    return r


@pytest.mark.parametrize("d", [3, 5, 7])
def test_dropout_free_distance(d):
    gc = build_gauge_code(d)
    assert code_distance(gc, "X") == d
    assert code_distance(gc, "Z") == d
    assert not gc.superstabilizers
    assert all(o.kind == "stabilizer" for o in gc.operators)


def test_one_logical_qubit_dropout_free():
    # n - rank(stabilizers) = 1 for the mid-cycle code
    gc = build_gauge_code(3)
    qs = sorted(gc.qubits)
    rows = [[int(q in o.support) for q in qs] for o in gc.operators]
    xs = [r for r, o in zip(rows, gc.operators) if o.basis == "X"]
    zs = [r for r, o in zip(rows, gc.operators) if o.basis == "Z"]
    assert len(qs) - gf2_rank(xs) - gf2_rank(zs) == 1


def test_weight_one_gauges_keep_distance():
    assert code_distance(build_gauge_code(3, W1_CFG, legacy=True), "Z") == 2
    gc = build_gauge_code(3, W1_CFG)
    assert code_distance(gc, "Z") == 3
    w1 = [o for o in gc.gauges() if len(o.support) == 1]
    assert w1 and all(o.basis == "X" for o in w1)
    # the superstabilizer excluded by that gauge is of the opposite basis
    assert any(s.basis == "Z" for s in gc.superstabilizers)


def test_superstabilizers_commute_with_every_operator():
    p = build_patch(7)
    for seed in range(8):
        gc = build_gauge_code(p, sample_dropout(p, 0.03, 0.03, seed))
        for s in gc.superstabilizers:
            assert len(s.member_ids) >= 2
            for o in gc.operators:
                if o.basis != s.basis:
                    assert len(o.support & s.combined_support) % 2 == 0


def test_bare_logicals_commute_and_witness_is_logical():
    p = build_patch(5)
    gc = build_gauge_code(p, sample_dropout(p, 0.03, 0.03, 3))
    for basis in "XZ":
        other = "Z" if basis == "X" else "X"
        for sup in bare_logicals(gc, basis):
            for o in gc.operators:
                if o.basis == other:
                    assert len(o.support & sup) % 2 == 0
        dist, w = logical_witness(gc, basis)
        assert dist == len(w) == code_distance(gc, basis)
        assert is_logical(gc, basis, w)
        # a dressed logical anticommutes with some bare partner
        assert any(len(w & sup) % 2 for sup in bare_logicals(gc, other))


def test_weight_one_mode_never_worse_than_legacy():
    p = build_patch(5)
    for seed in range(25):
        cfg = sample_dropout(p, 0.03, 0.03, seed)
        try:
            new, old = build_gauge_code(p, cfg), build_gauge_code(p, cfg, legacy=True)
        except (PatchDestroyedError, NoLogicalError):
            continue
        for b in "XZ":
            assert code_distance(new, b) >= code_distance(old, b)


def test_destroyed_patch_raises():
    p = build_patch(3)
    with pytest.raises((PatchDestroyedError, NoLogicalError)):
        build_gauge_code(p, DropoutConfig(3, set(p.qubits)))


def test_gauge_code_json_is_stable():
    gc = build_gauge_code(3, W1_CFG)
    assert gc.to_json() == build_gauge_code(3, W1_CFG).to_json()
