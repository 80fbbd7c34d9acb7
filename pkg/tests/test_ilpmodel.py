from itertools import product

import numpy as np
import pytest

from luciopt import Instance, Objective, build_model, build_patch, objective_terms, sample_dropout
from luciopt.heuristic import validate_diagram
from luciopt.ilpmodel import IlpModel, diagram_objective, hint_from_diagram

from conftest import canonical, instance


def _gate_model():
    return IlpModel(instance(3), 2, "cyclic", None)


@pytest.mark.parametrize("arity", [2, 3, 4, 5])
@pytest.mark.parametrize("kind", ["and", "or"])
def test_linearization_truth_table(kind, arity):
    m = _gate_model()
    args = [m.add_var(f"a{k}", "primary") for k in range(arity)]
    y = (m.and_var if kind == "and" else m.or_var)("y", args)
    fn = all if kind == "and" else any
    for bits in product((0, 1), repeat=arity):
        ok = []
        for yv in (0, 1):
            x = [0] * len(m.vars)
            for a, b in zip(args, bits):
                x[a] = b
            x[y] = yv
            if m.is_feasible(x):
                ok.append(yv)
        assert ok == [int(fn(bits))], (bits, ok)


def test_objective_defaults_and_validation():
    o = Objective()
    assert (o.alpha, o.beta, o.gamma, o.delta) == (6, 5, 12, 2)
    with pytest.raises(ValueError):
        Objective(alpha=-1)
    with pytest.raises(ValueError):
        Objective(mode="fast")
    assert Objective.max_measurements().weights() == (0, 0, 0, 0)


def test_model_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_model(instance(3), T=1)
    with pytest.raises(ValueError):
        build_model(instance(3), topology="spiral")


@pytest.mark.parametrize("d", [3, 5])
def test_canonical_hint_is_feasible_and_terms_agree(d):
    diag = canonical(d)
    m = build_model(instance(d))
    x = hint_from_diagram(m, diag)
    assert m.is_feasible(x)
    assert m.terms(x) == objective_terms(diag)
    assert objective_terms(diag)[3] == 0  # no stretched detectors in the canonical schedule
    assert m.decode(x).boards == diag.boards
    assert m.objective_value(x) == diagram_objective(diag) * m.scale


def _fuzz(inst, T, n, seed):
    """Random primary assignments: perturbed valid ones and sparse random ones."""
    from luciopt import default_diagram

    rng = np.random.default_rng(seed)
    m = build_model(inst, T)
    keys = sorted(m.primary)
    base = None
    try:
        base = hint_from_diagram(m, default_diagram(inst, T=T))
    except Exception:
        pass
    for _ in range(n):
        if base is not None and rng.random() < 0.6:
            prim = {k: base[m.primary[k]] for k in keys}
            for j in rng.choice(len(keys), size=int(rng.integers(0, 3)), replace=False):
                prim[keys[j]] ^= 1
        else:
            dens = rng.uniform(0.02, 0.1)
            prim = {k: int(rng.random() < dens) for k in keys}
        yield m, m.complete(prim)


def test_feasibility_agrees_with_validation_sample():
    agree = {True: 0, False: 0}
    for m, x in _fuzz(instance(3), 4, 150, 0):
        feas = m.is_feasible(x)
        assert feas == (validate_diagram(m.decode(x)) == [])
        agree[feas] += 1
        if feas:
            assert m.terms(x) == objective_terms(m.decode(x))
    assert agree[True] and agree[False]


def test_lp_export_mentions_every_variable():
    m = build_model(instance(3))
    text = m.to_lp()
    assert text.startswith("\\ luciopt model")
    assert text.rstrip().endswith("End")
    for v in m.vars[:50]:
        assert v.name in text


def test_max_measurement_mode_counts_measurements_only():
    diag = canonical(3)
    m = build_model(instance(3), objective=Objective.max_measurements())
    x = hint_from_diagram(m, diag)
    assert m.objective_value(x) == -objective_terms(diag)[0] * m.scale


def test_superstabilizer_constraint_present_under_dropout():
    p = build_patch(5)
    for seed in range(20):
        inst = Instance.from_config(5, sample_dropout(p, 0.05, 0.05, seed))
        if inst.code.superstabilizers:
            break
    m = build_model(inst)
    assert any(c.label == "superstab" for c in m.constraints)
