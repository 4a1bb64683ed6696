import math

import numpy as np
import pytest

from biharm.biharmonic import classify
from biharm.catalog import (
    ExampleSpec,
    InvalidExample,
    NoClosedForm,
    canonical_family,
    expected_invariants,
    make_example,
)
from biharm.hypersurface import evaluate, sample_points
from biharm.sweep import sweep
from oracles import clifford_invariants, small_sphere_invariants


def closed_form_specs():
    specs = []
    for m in (2, 3, 4):
        for a in (0.4, 0.6, 1 / math.sqrt(2), 0.9):
            specs.append(ExampleSpec("small-hypersphere", {"m": m, "a": a}))
    for p, q, r1 in ((1, 1, 0.5), (1, 2, 0.6), (2, 1, 0.8), (2, 2, 1 / math.sqrt(2)), (1, 3, 0.45)):
        specs.append(ExampleSpec("clifford", {"p": p, "q": q, "r1": r1}))
    for m, r in ((2, 0.5), (3, 2.0)):
        specs.append(ExampleSpec("euclidean-sphere", {"m": m, "r": r}))
    specs.append(ExampleSpec("euclidean-cylinder", {"m": 3, "k": 1, "r": 0.8}))
    specs.append(ExampleSpec("euclidean-plane", {"m": 3}))
    specs.append(ExampleSpec("hyperbolic-geodesic", {"m": 3, "C": -2.0}))
    specs.append(ExampleSpec("horosphere", {"m": 2}))
    specs.append(ExampleSpec("horosphere", {"m": 4, "C": -0.5}))
    specs.append(ExampleSpec("small-hypersphere", {"m": 3, "a": 0.5, "C": 4.0}))
    return specs


@pytest.mark.parametrize("spec", closed_form_specs(), ids=lambda s: s.label())
def test_pipeline_matches_closed_form(spec):
    im = make_example(spec)
    ev = evaluate(im, sample_points(im, 30))
    ex = expected_invariants(spec)
    fd = ev.fundamental
    for got, want in ((fd.H, ex.H), (fd.A_norm_sq, ex.A_norm_sq), (ev.intrinsic.scal, ex.Scal)):
        assert np.all(np.abs(got - want) <= 1e-10 + 1e-7 * np.abs(want))
    assert classify(ev).verdict == ex.verdict


def test_closed_forms_against_independent_oracles():
    for m, a in ((3, 0.8), (2, 0.5), (4, 1 / math.sqrt(2))):
        ex = expected_invariants(ExampleSpec("small-hypersphere", {"m": m, "a": a}))
        o = small_sphere_invariants(m, a)
        assert ex.H == pytest.approx(o["H"]) and ex.A_norm_sq == pytest.approx(o["A_norm_sq"])
        assert ex.Scal == pytest.approx(o["Scal"])
    for p, q, r1 in ((1, 2, 1 / math.sqrt(2)), (3, 1, 0.4), (2, 2, 0.7)):
        ex = expected_invariants(ExampleSpec("clifford", {"p": p, "q": q, "r1": r1}))
        o = clifford_invariants(p, q, r1)
        assert ex.H == pytest.approx(o["H"]) and ex.Scal == pytest.approx(o["Scal"])


def test_named_expectations():
    ex = expected_invariants(ExampleSpec("small-hypersphere", {"m": 3, "a": 0.8}))
    assert (ex.H, ex.A_norm_sq, ex.Scal) == pytest.approx((0.75, 27 / 16, 75 / 8))
    ex = expected_invariants(ExampleSpec("euclidean-sphere", {"m": 2, "r": 1.0}))
    assert (ex.H, ex.A_norm_sq, ex.Scal) == (1.0, 2.0, 2.0)
    ex = expected_invariants(ExampleSpec("horosphere", {"m": 3}))
    assert ex.normal_res == pytest.approx(-6.0) and ex.verdict == "NonBiharmonic"
    ex = expected_invariants(ExampleSpec("clifford", {"p": 1, "q": 2, "r1": math.sqrt(1 / 3)}))
    assert abs(ex.H) < 1e-15 and ex.verdict == "Minimal"
    ex = expected_invariants(ExampleSpec("small-hypersphere", {"m": 3}))
    assert ex.verdict == "ProperBiharmonic" and ex.Scal == pytest.approx(12)
    with pytest.raises(NoClosedForm):
        expected_invariants(ExampleSpec("graph", {"m": 2}))


def test_mirror_symmetry():
    for p, q, r1 in ((1, 2, 0.6), (1, 3, 1 / math.sqrt(2)), (2, 3, 0.5)):
        a = make_example(ExampleSpec("clifford", {"p": p, "q": q, "r1": r1}))
        b = make_example(ExampleSpec("clifford", {"p": q, "q": p, "r1": math.sqrt(1 - r1 * r1)}))
        ea, eb = evaluate(a, sample_points(a, 20)), evaluate(b, sample_points(b, 20))
        assert np.allclose(ea.fundamental.H, -eb.fundamental.H, atol=1e-12)
        assert np.allclose(ea.fundamental.A_norm_sq, eb.fundamental.A_norm_sq, atol=1e-12)
        assert np.allclose(ea.intrinsic.scal, eb.intrinsic.scal, atol=1e-10)
        assert classify(ea).verdict == classify(eb).verdict


def test_small_hypersphere_sweep_root():
    res = sweep(ExampleSpec("small-hypersphere", {"m": 3}), "a", 0.2, 0.95, 31, refine=True, samples=10)
    assert len(res.roots) == 1
    assert abs(res.roots[0] - 1 / math.sqrt(2)) < 1e-6


def test_clifford_sweep_finds_minimal_torus():
    res = sweep(ExampleSpec("clifford", {"p": 1, "q": 2}), "r1", 0.2, 0.9, 15, refine=True, target="H", samples=10)
    assert len(res.roots) == 1
    assert abs(res.roots[0] ** 2 - 1 / 3) < 1e-6


def test_sweep_threads_do_not_change_results(monkeypatch):
    spec = ExampleSpec("small-hypersphere", {"m": 2})
    monkeypatch.setenv("BIHARM_NUM_THREADS", "1")
    a = sweep(spec, "a", 0.3, 0.9, 8, samples=10)
    monkeypatch.setenv("BIHARM_NUM_THREADS", "4")
    b = sweep(spec, "a", 0.3, 0.9, 8, samples=10)
    assert [r.as_dict() for r in a.rows] == [r.as_dict() for r in b.rows]


def test_graph_coefficients_seeded():
    a = make_example(ExampleSpec("graph", {"m": 3, "seed": 4}))
    b = make_example(ExampleSpec("graph", {"m": 3, "seed": 4}))
    x = sample_points(a, 5)
    assert np.array_equal(a(x), b(x))
    c = make_example(ExampleSpec("graph", {"m": 3, "seed": 5}))
    assert not np.array_equal(a(x), c(x))


@pytest.mark.parametrize("family,params", [
    ("small-hypersphere", {"a": 1.5}),
    ("small-hypersphere", {"a": 0.5, "C": -1.0}),
    ("clifford", {"p": 1, "q": 2, "r1": 1.0}),
    ("clifford", {"p": 1, "q": 2, "m": 4}),
    ("clifford", {"p": 0, "q": 2}),
    ("euclidean-sphere", {"r": -1.0}),
    ("euclidean-cylinder", {"m": 3, "k": 3}),
    ("graph", {"m": 2, "ambient": "product"}),
    ("horosphere", {"C": 1.0}),
])
def test_invalid_params(family, params):
    with pytest.raises(InvalidExample):
        make_example(ExampleSpec(family, params))


def test_family_aliases():
    assert canonical_family("SmallHypersphere") == "small-hypersphere"
    assert canonical_family("GeneralizedClifford") == "clifford"
    with pytest.raises(InvalidExample):
        canonical_family("torus")
