import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biharm import jets as J
from biharm.jets import Jet, JetError, jet_space
from oracles import fd_derivative


def coeff_dict(j: Jet) -> dict:
    sp = j.space
    return {tuple(a): float(c) for a, c in zip(sp.indices, j.coeffs)}


# -- basic examples ---------------------------------------------------------------

def test_seed_variable_coordinate_jet():
    j = J.seed_variable(0, 2.0, 2, 2)
    d = coeff_dict(j)
    assert d[(0, 0)] == 2.0 and d[(1, 0)] == 1.0
    assert all(v == 0.0 for k, v in d.items() if k not in ((0, 0), (1, 0)))
    j = J.seed_variable(1, 0.0, 2, 1)
    assert coeff_dict(j) == {(0, 0): 0.0, (1, 0): 0.0, (0, 1): 1.0}


def test_square_of_coordinate(kernel_backend):
    x = J.seed_variable(0, 3.0, 1, 3)
    assert coeff_dict(x * x) == {(0,): 9.0, (1,): 6.0, (2,): 1.0, (3,): 0.0}
    assert J.extract_derivative(x * x, (2,)) == 2.0
    assert J.extract_derivative(x * x, (0,)) == 9.0


def test_seed_variable_index_error():
    with pytest.raises(JetError):
        J.seed_variable(2, 0.0, 2, 3)


def test_sqrt_of_constant_and_sin_series(kernel_backend):
    c = J.sqrt(Jet.constant(4.0, 1, 3))
    assert coeff_dict(c) == {(0,): 2.0, (1,): 0.0, (2,): 0.0, (3,): 0.0}
    s = J.sin(J.seed_variable(0, 0.0, 1, 3))
    assert np.allclose(s.coeffs, [0.0, 1.0, 0.0, -1.0 / 6.0], rtol=0, atol=1e-16)


def test_exp_fourth_derivative():
    e = J.exp(J.seed_variable(0, 0.0, 1, 5))
    assert J.extract_derivative(e, (4,)) == pytest.approx(1.0, abs=1e-14)


def test_extract_derivative_order_error():
    with pytest.raises(JetError):
        J.extract_derivative(J.seed_variable(0, 1.0, 1, 2), (3,))


def test_domain_errors():
    x = J.seed_variable(0, 0.0, 1, 3)
    with pytest.raises(JetError):
        1.0 / x
    with pytest.raises(JetError):
        J.sqrt(x)
    with pytest.raises(JetError):
        J.sqrt(x - 1.0)


def test_mismatched_spaces_rejected():
    a = J.seed_variable(0, 1.0, 2, 3)
    b = J.seed_variable(0, 1.0, 2, 2)
    c = J.seed_variable(0, 1.0, 1, 3)
    for other in (b, c):
        with pytest.raises(JetError):
            a + other
        with pytest.raises(JetError):
            a * other


def test_coefficient_count():
    for n in range(1, 7):
        for k in range(6):
            assert jet_space(n, k).size == math.comb(n + k, k)
    assert jet_space(6, 5).size == 462


def test_exp_sin_product_against_finite_differences(kernel_backend):
    x0 = np.array([0.3, 0.7])
    X = J.seed(x0, 3)
    f = J.exp(X[0]) * J.sin(X[1])

    def ref(p):
        return math.exp(p[0]) * math.sin(p[1])

    for alpha in jet_space(2, 3).indices:
        got = J.extract_derivative(f, alpha)
        want = fd_derivative(ref, x0, alpha)
        assert abs(got - want) <= 1e-6 * max(1.0, abs(want)), alpha


# -- random compositions vs finite differences ------------------------------------

_UNARY = [
    ("sin", J.sin, math.sin),
    ("cos", J.cos, math.cos),
    ("exp", lambda u: J.exp(0.5 * u), lambda u: math.exp(0.5 * u)),
    ("sqrt", lambda u: J.sqrt(1.0 + u * u), lambda u: math.sqrt(1.0 + u * u)),
    ("pow", lambda u: J.lift_arithmetic("pow", 1.5 + J.cos(u), 1.5), lambda u: (1.5 + math.cos(u)) ** 1.5),
    ("div", lambda u: 1.0 / (2.0 + J.sin(u)), lambda u: 1.0 / (2.0 + math.sin(u))),
]
_BINARY = [
    ("add", lambda a, b: a + b),
    ("sub", lambda a, b: a - b),
    ("mul", lambda a, b: a * b),
]


def random_expression(rng, nvars, depth):
    """Return (jet builder, float evaluator, text) for a random expression."""
    if depth == 0 or rng.random() < 0.2:
        i = int(rng.integers(nvars))
        c = float(rng.uniform(0.5, 1.5))
        return (lambda X: c * X[i]), (lambda p: c * p[i]), f"{c:.2f}*x{i}"
    if rng.random() < 0.5:
        name, fj, ff = _UNARY[int(rng.integers(len(_UNARY)))]
        sj, sf, st_ = random_expression(rng, nvars, depth - 1)
        return (lambda X: fj(sj(X))), (lambda p: ff(sf(p))), f"{name}({st_})"
    name, op = _BINARY[int(rng.integers(len(_BINARY)))]
    aj, af, at = random_expression(rng, nvars, depth - 1)
    bj, bf, bt = random_expression(rng, nvars, depth - 1)
    return (lambda X: op(aj(X), bj(X))), (lambda p: op(af(p), bf(p))), f"{name}({at}, {bt})"


def composition_errors(count=50, seed=2024):
    """Largest relative error of each random composition against differences."""
    rng = np.random.default_rng(seed)
    worst = []
    for _ in range(count):
        nvars = int(rng.integers(1, 4))
        fj, ff, text = random_expression(rng, nvars, 3)
        x0 = rng.uniform(-0.8, 0.8, size=nvars)
        jet = fj(J.seed(x0, 3))
        if not isinstance(jet, Jet):
            continue
        err = 0.0
        for alpha in jet_space(nvars, 3).indices:
            got = J.extract_derivative(jet, alpha)
            want = fd_derivative(ff, x0, alpha)
            err = max(err, abs(got - want) / max(1.0, abs(want)))
        worst.append((err, text))
    return worst


def test_random_compositions_match_finite_differences(kernel_backend):
    worst = composition_errors()
    assert len(worst) == 50
    err, text = max(worst)
    assert err < 1e-6, text


# -- algebraic properties -----------------------------------------------------------

def random_jet(rng, n, k):
    sp = jet_space(n, k)
    return Jet(rng.uniform(-1, 1, size=sp.size), sp)


jet_params = st.tuples(st.integers(1, 4), st.integers(0, 5), st.integers(0, 2**32 - 1))


@settings(max_examples=60, deadline=None)
@given(jet_params)
def test_ring_axioms(params):
    n, k, seed = params
    rng = np.random.default_rng(seed)
    a, b, c = (random_jet(rng, n, k) for _ in range(3))
    assert np.allclose(((a + b) + c).coeffs, (a + (b + c)).coeffs, rtol=0, atol=1e-12)
    assert np.allclose((a * (b + c)).coeffs, (a * b + a * c).coeffs, rtol=0, atol=1e-12)
    assert np.allclose((a * b).coeffs, (b * a).coeffs, rtol=0, atol=1e-12)
    assert np.allclose(((a * b) * c).coeffs, (a * (b * c)).coeffs, rtol=0, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(jet_params)
def test_truncation_consistency_exact(params):
    n, k, seed = params
    if k == 0:
        return
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-0.5, 0.5, size=n)

    def f(X):
        u = X[0] * X[n - 1] + 0.3
        return J.exp(J.sin(u)) * J.sqrt(2.0 + u * u) / (1.5 + J.cos(X[0]))

    hi = f(J.seed(x0, k))
    lo = f(J.seed(x0, k - 1))
    assert np.array_equal(hi.truncate(k - 1).coeffs, lo.coeffs)


@settings(max_examples=30, deadline=None)
@given(jet_params)
def test_backends_agree(params):
    n, k, seed = params
    rng = np.random.default_rng(seed)
    a, b = random_jet(rng, n, k), random_jet(rng, n, k)
    results = {}
    for name in J.backend.available():
        prev = J.backend.use(name)
        try:
            results[name] = (a * b).coeffs, J.exp(a).coeffs
        finally:
            J.backend.use(prev)
    ref = results["python"]
    for prod, ex in results.values():
        assert np.allclose(prod, ref[0], rtol=1e-14, atol=1e-14)
        assert np.allclose(ex, ref[1], rtol=1e-14, atol=1e-14)


def test_inverse_and_einsum(kernel_backend):
    rng = np.random.default_rng(3)
    X = J.seed(np.array([0.2, -0.1]), 4)
    M = J.stack([J.stack([2.0 + X[0], J.sin(X[1])], axis=-1),
                 J.stack([X[0] * X[1], 3.0 + J.cos(X[0])], axis=-1)], axis=-2)
    Minv = J.inv(M)
    eye = J.einsum("ij,jk->ik", M, Minv)
    assert np.allclose(eye.value, np.eye(2), atol=1e-14)
    higher = np.array(eye.coeffs)
    higher[..., 0] = 0.0
    assert np.abs(higher).max() < 1e-13
    v = rng.normal(size=2)
    assert np.allclose(J.einsum("ij,j->i", M, v).coeffs, np.einsum("ijZ,j->iZ", M.coeffs, v))


def test_compose_polynomial_matches_direct_evaluation():
    # f(y) = exp(y0) * y1^2 expanded at y0, then evaluated on a curve y(x)
    y0 = np.array([0.1, 0.4])
    F = J.seed(y0, 4)
    outer = J.exp(F[0]) * F[1] * F[1]
    x = J.seed(np.array([0.3]), 4)
    inner_full = J.stack([0.1 + J.sin(x[0] - 0.3), 0.4 + (x[0] - 0.3) * x[0]], axis=-1)
    direct = J.exp(inner_full[0]) * inner_full[1] * inner_full[1]
    composed = J.compose_polynomial(outer, inner_full - y0)
    assert np.allclose(composed.coeffs, direct.coeffs, rtol=1e-13, atol=1e-14)


def test_lift_arithmetic_dispatch():
    x = J.seed_variable(0, 0.5, 1, 3)
    assert np.allclose(J.lift_arithmetic("mul", x, x).coeffs, (x * x).coeffs)
    assert np.allclose(J.lift_arithmetic("sqrt", x + 1.0).coeffs, J.sqrt(x + 1.0).coeffs)
    with pytest.raises(JetError):
        J.lift_arithmetic("tanh", x)
