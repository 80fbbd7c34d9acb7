from hypothesis import HealthCheck, given, settings, strategies as st

from luciopt import (Instance, LuciDiagram, build_model, build_patch, default_diagram,
                     objective_terms, sample_dropout, validate_diagram)
from luciopt.gauge import NoLogicalError, PatchDestroyedError
from luciopt.heuristic import with_boards
from luciopt.ilpmodel import assignment_from_primary, hint_from_diagram
from luciopt.render import parse_text, render_text

from conftest import canonical, instance

SLOW = settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def _instance(seed, rate):
    try:
        return Instance.from_config(5, sample_dropout(build_patch(5), rate, rate, seed))
    except (PatchDestroyedError, NoLogicalError):
        return None


@SLOW
@given(seed=st.integers(0, 10**6), rate=st.sampled_from([0.01, 0.03, 0.06]))
def test_gauge_operators_commute_across_bases(seed, rate):
    inst = _instance(seed, rate)
    if inst is None:
        return
    ops = inst.operators
    for a in ops:
        for b in ops:
            if a.basis != b.basis and a.kind == "stabilizer":
                assert len(a.support & b.support) % 2 == 0
    for s in inst.code.superstabilizers:
        for o in ops:
            if o.basis != s.basis:
                assert len(o.support & s.combined_support) % 2 == 0


@SLOW
@given(seed=st.integers(0, 10**6), rate=st.sampled_from([0.01, 0.03]))
def test_default_diagram_valid_and_model_agrees(seed, rate):
    inst = _instance(seed, rate)
    if inst is None:
        return
    diag = default_diagram(inst)
    assert validate_diagram(diag) == []
    m = build_model(inst)
    x = hint_from_diagram(m, diag)
    assert m.is_feasible(x)
    assert m.terms(x) == objective_terms(diag)
    assert LuciDiagram.from_text(diag.to_text()).boards == diag.boards
    assert parse_text(render_text(diag)).boards == diag.boards


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 15)), max_size=12))
def test_removing_measurements_never_increases_m(drops):
    diag = canonical(3)
    boards = [dict(b) for b in diag.boards]
    for t, i in drops:
        boards[t].pop(i, None)
    cut = with_boards(diag, boards, "test")
    m0 = objective_terms(diag)[0]
    m1, s2, s3, _a, _b = objective_terms(cut)
    assert m1 <= m0
    assert s3 <= s2 <= len(diag.code.operators)
    model = build_model(instance(3))
    keys = [(t, i, diag.instance.catalog.index(s)) for t, b in enumerate(boards) for i, s in b.items()]
    assert model.terms(assignment_from_primary(model, keys)) == objective_terms(cut)


def _only(diag, i, keep_boards, topology="cyclic"):
    """Canonical diagram with operator i measured only in ``keep_boards``."""
    boards = [dict(b) for b in diag.boards]
    shape = next(b[i] for b in diag.boards if i in b)
    for t in range(diag.T):
        boards[t].pop(i, None)
        if t in keep_boards:
            boards[t][i] = shape
    out = with_boards(diag, boards, "test")
    if topology != out.topology:
        from dataclasses import replace
        out = replace(out, topology=topology)
    return out


def test_skip_windows_cyclic_and_open():
    diag = canonical(3)
    i = next(iter(diag.boards[0]))
    base = objective_terms(diag)
    assert base[1:3] == (0, 0)
    # (measured boards, topology) -> (s2, s3) for operator i
    cases = {
        ((0,), "cyclic"): (1, 1),
        ((0, 2), "cyclic"): (0, 0),
        ((0, 1), "cyclic"): (1, 0),
        ((0, 1), "open"): (1, 0),
        ((0, 3), "cyclic"): (1, 0),
        ((0, 3), "open"): (1, 0),
        ((1, 2), "cyclic"): (1, 0),
        ((1, 2), "open"): (0, 0),
    }
    for (keep, topo), (s2, s3) in cases.items():
        d = _only(diag, i, keep, topo)
        got = objective_terms(d)
        assert got[1:3] == (s2, s3), (keep, topo, got)
        m = build_model(instance(3), topology=topo)
        keys = [(t, j, d.instance.catalog.index(s)) for t, b in enumerate(d.boards) for j, s in b.items()]
        assert m.terms(assignment_from_primary(m, keys))[1:3] == (s2, s3)
