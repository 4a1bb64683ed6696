import math

import numpy as np
import pytest

from biharm.biharmonic import (
    AuditNotApplicable,
    Tolerances,
    WrongAmbient,
    biharmonic_residual,
    classify,
    einstein_deviation,
    inequality_diagnostics,
    prop_eps_bound,
    theorem_audit,
)
from biharm.catalog import ExampleSpec, make_example
from biharm.hypersurface import evaluate, sample_points

S3 = ExampleSpec("small-hypersphere", {"m": 3})
CLIFFORD = ExampleSpec("clifford", {"p": 1, "q": 2})


def ev_of(spec, n=50, orientation=1):
    im = make_example(spec)
    return evaluate(im, sample_points(im, n), orientation)


def test_small_hypersphere_residual_vanishes():
    r = biharmonic_residual(ev_of(S3, 20))
    assert np.abs(r.normal_res).max() < 1e-9
    assert np.abs(r.tangent_res).max() < 1e-9


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_round_sphere_normal_residual(r):
    res = biharmonic_residual(ev_of(ExampleSpec("euclidean-sphere", {"m": 2, "r": r}), 20))
    assert np.abs(res.normal_res + 2 / r**3).max() < 1e-8


def test_clifford_is_proper_biharmonic():
    ev = ev_of(CLIFFORD, 20)
    r = biharmonic_residual(ev)
    assert r.norm.max() < 1e-9
    assert np.abs(np.abs(ev.fundamental.H) - 1 / 3).max() < 1e-12


def test_space_form_specialisation():
    for spec in (S3, CLIFFORD, ExampleSpec("graph", {"m": 3, "seed": 2, "C": 1.0}),
                 ExampleSpec("graph", {"m": 2, "seed": 4, "C": -0.5}), ExampleSpec("horosphere", {"m": 3})):
        ev = ev_of(spec, 20)
        C, m = ev.im.ambient.C, ev.im.m
        fd = ev.fundamental
        want = ev.scalar.lap_H - fd.H * (fd.A_norm_sq - m * C)
        assert np.abs(biharmonic_residual(ev).normal_res - want).max() < 1e-12


def test_orientation_invariance():
    for spec in (ExampleSpec("graph", {"m": 3, "seed": 5, "C": 1.0}), CLIFFORD, S3):
        a, b = ev_of(spec, 20), ev_of(spec, 20, orientation=-1)
        ra, rb = biharmonic_residual(a), biharmonic_residual(b)
        assert np.allclose(ra.normal_res, -rb.normal_res, atol=1e-12)
        assert np.allclose(ra.tangent_res, rb.tangent_res, atol=1e-10)
        assert np.allclose(ra.norm, rb.norm, atol=1e-12)
        assert classify(a).verdict == classify(b).verdict


def test_classify_examples():
    assert classify(ev_of(ExampleSpec("small-hypersphere", {"m": 3, "a": 1.0}))).verdict == "Minimal"
    assert classify(ev_of(CLIFFORD)).verdict == "ProperBiharmonic"
    ev = ev_of(ExampleSpec("small-hypersphere", {"m": 3, "a": 0.8}))
    cv = classify(ev)
    assert cv.verdict == "NonBiharmonic"
    r = biharmonic_residual(ev)
    assert np.abs(ev.fundamental.H - 0.75).max() < 1e-12
    assert np.abs(ev.fundamental.A_norm_sq - 27 / 16).max() < 1e-12
    assert np.abs(r.normal_res - 0.984375).max() < 1e-10
    for key in ("max_abs_H", "H_stddev", "mean_A_norm_sq", "max_residual_norm", "einstein_deviation", "scal_stddev"):
        assert key in cv.evidence


def test_classify_inconclusive_band():
    # just off the root: residual between tol_res and 10 tol_res
    a = 1 / math.sqrt(2) + 2e-9 / 3
    cv = classify(ev_of(ExampleSpec("small-hypersphere", {"m": 3, "a": a})), tolerances=Tolerances(tol_res=1e-9))
    assert cv.verdict == "Inconclusive"


def test_classify_needs_ten_samples():
    with pytest.raises(ValueError):
        classify(ev_of(S3, 5))


@pytest.mark.parametrize("spec", [S3, CLIFFORD, ExampleSpec("horosphere", {"m": 3}),
                                  ExampleSpec("graph", {"m": 3, "seed": 3}),
                                  ExampleSpec("euclidean-plane", {"m": 2})], ids=lambda s: s.label())
def test_verdict_invariants(spec):
    tol = Tolerances()
    cv = classify(ev_of(spec), tolerances=tol)
    e = cv.evidence
    if cv.verdict == "Minimal":
        assert e["max_abs_H"] < tol.tol_H
    if cv.verdict == "ProperBiharmonic":
        assert e["max_residual_norm"] < tol.tol_res and e["max_abs_H"] >= tol.tol_H


def test_minimal_implies_biharmonic():
    for spec in (ExampleSpec("small-hypersphere", {"m": 4, "a": 1.0}), ExampleSpec("euclidean-plane", {"m": 3}),
                 ExampleSpec("hyperbolic-geodesic", {"m": 3}), ExampleSpec("clifford", {"p": 2, "q": 2}),
                 ExampleSpec("clifford", {"p": 1, "q": 2, "r1": math.sqrt(1 / 3)})):
        ev = ev_of(spec)
        assert np.abs(ev.fundamental.H).max() < 1e-10
        assert biharmonic_residual(ev).norm.max() < 1e-9


def test_einstein_deviation_examples():
    d = einstein_deviation(ev_of(S3))
    assert d.is_einstein and abs(d.mu_hat - 4) < 1e-10
    assert not einstein_deviation(ev_of(CLIFFORD)).is_einstein
    p = einstein_deviation(ev_of(ExampleSpec("euclidean-plane", {"m": 2})))
    assert p.is_einstein and p.mu_hat == 0
    with pytest.raises(ValueError):
        einstein_deviation(ev_of(S3, 1))


def applicable(report):
    return {a.name: a for a in report.assertions if a.passed is not None}


def test_audit_small_hypersphere():
    rep = theorem_audit(ev_of(S3))
    got = applicable(rep)
    for name in ("einstein_in_space_form.A_norm_sq", "einstein_in_space_form.scal",
                 "einstein_in_space_form.scal_positive", "einstein_in_einstein.A_norm_sq"):
        assert got[name].passed, name
    assert rep.passed


def test_audit_clifford():
    rep = theorem_audit(ev_of(CLIFFORD))
    got = applicable(rep)
    assert got["const_scal_in_sphere.H_constant"].passed and got["const_scal_in_sphere.H_constant"].value < 1e-10
    assert got["const_scal_in_sphere.A_norm_sq"].passed
    assert "einstein_in_space_form.A_norm_sq" not in got
    na = {a.name: a.note for a in rep.assertions if a.passed is None}
    assert "not Einstein" in na["einstein_in_space_form.A_norm_sq"]


def test_audit_plane():
    rep = theorem_audit(ev_of(ExampleSpec("euclidean-plane", {"m": 2})))
    got = applicable(rep)
    assert got["minimal_is_biharmonic"].passed
    for a in rep.assertions:
        if a.name.endswith(("A_norm_sq", ".scal", "scal_positive", "H_constant")):
            assert a.passed is None and a.note.startswith("not applicable")


def test_audit_einstein_ambient_and_generic():
    rep = theorem_audit(ev_of(ExampleSpec("graph", {"m": 3, "seed": 1, "ambient": "product"})))
    assert rep.verdict.verdict == "NonBiharmonic"
    from biharm.ambient import generic_chart, space_form_chart
    from biharm.hypersurface import ImmersionChart

    base = make_example(ExampleSpec("graph", {"m": 2, "seed": 1}))
    sf = space_form_chart(0.0, 3)
    im = ImmersionChart(2, generic_chart(3, sf.metric), base.phi, base.lo, base.hi)
    with pytest.raises(AuditNotApplicable):
        theorem_audit(evaluate(im, sample_points(im, 12)))
    with pytest.raises(WrongAmbient):
        inequality_diagnostics(evaluate(im, sample_points(im, 12)))


def test_inequality_diagnostics():
    assert prop_eps_bound(3, 1.0) == pytest.approx(2 / 19, abs=1e-15)
    d = inequality_diagnostics(ev_of(S3), epsilon=1.0, constant_scal=True)
    assert np.abs(d["ric_formula_res"]).max() < 1e-12
    assert np.abs(d["bochner_lb_margin"]).max() < 1e-12
    assert np.all(d["prop_eps_hypothesis"]) and np.abs(d["prop_eps_margin"]).max() < 1e-12
    g = inequality_diagnostics(ev_of(ExampleSpec("graph", {"m": 3, "seed": 7})))
    assert np.all(np.isnan(g["ric_formula_res"])) and not np.any(g["tangent_equation_holds"])
    assert np.all(np.isnan(g["bochner_lb_margin"]))
