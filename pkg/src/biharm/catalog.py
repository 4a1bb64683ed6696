"""Named example hypersurfaces with closed-form expected invariants.

Sphere and hyperbolic families are built in an embedding model (the round
sphere in ``R^{m+2}``, the hyperboloid in Minkowski space) and mapped into
the conformal-ball chart of :func:`biharm.ambient.space_form_chart`.
Factor spheres are parametrized by inverse stereographic projection.

Each family fixes its unit normal through a reference direction; if the
determinant convention of :mod:`biharm.hypersurface` disagrees with it, the
first chart coordinate is reflected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Callable

import numpy as np

from . import jets as J
from .ambient import AmbientChart, product_sphere_chart, space_form_chart
from .hypersurface import DEFAULT_ORDER, ImmersionChart, _base_normal
from .jets import Jet

FAMILIES = (
    "small-hypersphere",
    "clifford",
    "euclidean-sphere",
    "euclidean-cylinder",
    "euclidean-plane",
    "graph",
    "hyperbolic-geodesic",
    "horosphere",
)

_ALIASES = {
    "SmallHypersphere": "small-hypersphere",
    "GeneralizedClifford": "clifford",
    "generalized-clifford": "clifford",
    "EuclideanSphere": "euclidean-sphere",
    "EuclideanCylinder": "euclidean-cylinder",
    "EuclideanPlane": "euclidean-plane",
    "GraphHypersurface": "graph",
    "HyperbolicGeodesic": "hyperbolic-geodesic",
    "Horosphere": "horosphere",
}

VERDICTS = ("Minimal", "ProperBiharmonic", "NonBiharmonic", "Inconclusive")


class InvalidExample(ValueError):
    pass


class NoClosedForm(ValueError):
    pass


def canonical_family(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in FAMILIES:
        raise InvalidExample(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")
    return name


@dataclass
class ExampleSpec:
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.family = canonical_family(self.family)

    def get(self, key, default=None):
        return self.params.get(key, default)

    def label(self) -> str:
        items = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.family}({items})"


@dataclass
class Expected:
    H: float
    A_norm_sq: float
    Scal: float
    verdict: str
    normal_res: float


# -- building blocks -----------------------------------------------------------

def inverse_stereographic(s: Jet) -> Jet:
    """Unit-sphere point from stereographic coordinates; ``s = 0`` maps to the
    last basis vector. Batch shape ``(..., k)`` -> ``(..., k + 1)``."""
    r2 = (s * s).sum(axis=-1)
    inv = 1.0 / (1.0 + r2)
    head = 2.0 * s * inv.expand(-1)
    tail = (1.0 - r2) * inv
    return J.stack([head[..., i] for i in range(s.shape[-1])] + [tail], axis=-1)


def sphere_to_chart(X: Jet, R: float) -> Jet:
    """Point of the sphere of radius ``R`` in ``R^{n+1}`` to the conformal chart."""
    n = X.shape[-1] - 1
    denom = 1.0 + X[..., n] / R
    return 2.0 * X[..., :n] / denom.expand(-1)


def hyperboloid_to_chart(X0: Jet, Xs: Jet, R: float) -> Jet:
    """Hyperboloid point ``(X0, Xs)`` of radius ``R`` to the Poincare ball."""
    return 2.0 * Xs / (1.0 + X0 / R).expand(-1)


def _concat(*parts: Jet) -> Jet:
    cols = []
    for p in parts:
        cols.extend(p[..., i] for i in range(p.shape[-1]))
    return J.stack(cols, axis=-1)


def _direction(curve: Callable[[Jet], Jet]) -> np.ndarray:
    """Tangent of a curve at t = 0, via a one-variable jet."""
    t = J.seed_variable(0, 0.0, 1, 1)
    return curve(t).derivative((1,))


def _orient(im: ImmersionChart, hint: Callable[[np.ndarray], np.ndarray]) -> ImmersionChart:
    """Reflect the first chart coordinate if the determinant normal opposes ``hint``."""
    x0 = 0.5 * (np.asarray(im.lo) + np.asarray(im.hi))
    Y = im.phi(J.seed(x0[None, :], 1))
    E = J.stack([Y.diff(i) for i in range(im.m)], axis=-2).value
    h0 = im.ambient.metric(J.seed(Y.value, 0)).value
    xi = _base_normal(E, h0)[0]
    if float(xi @ h0[0] @ hint(x0)) > 0:
        return im
    phi = im.phi

    def reflected(x: Jet) -> Jet:
        flip = np.ones(im.m)
        flip[0] = -1.0
        return phi(x * flip)

    lo, hi = list(im.lo), list(im.hi)
    lo[0], hi[0] = -im.hi[0], -im.lo[0]
    return ImmersionChart(im.m, im.ambient, reflected, tuple(lo), tuple(hi), im.order, im.name)


def _box(m: int, half: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    return (-half,) * m, (half,) * m


# -- families ------------------------------------------------------------------

def _small_hypersphere(spec: ExampleSpec, order: int) -> ImmersionChart:
    m, a, C = int(spec.get("m", 3)), float(spec.get("a", 1 / math.sqrt(2))), float(spec.get("C", 1.0))
    if not 0 < a <= 1:
        raise InvalidExample("small hypersphere needs 0 < a <= 1")
    if C <= 0:
        raise InvalidExample("small hypersphere lives in a sphere (C > 0)")
    R, b = 1 / math.sqrt(C), math.sqrt(1 - a * a)
    amb = space_form_chart(C, m + 1)

    def embed(x: Jet) -> Jet:
        u = inverse_stereographic(x)
        last = Jet.constant(np.full(u.shape[:-1], R * b), u.num_vars, u.order)
        return _concat(R * a * u, J.stack([last], axis=-1))

    def phi(x: Jet) -> Jet:
        return sphere_to_chart(embed(x), R)

    def hint(x0):
        X0 = embed(J.seed(x0, 0)).value
        u0 = X0[:-1] / (R * a)
        N = np.concatenate([-b * u0, [a]])
        return _direction(lambda t: sphere_to_chart(J.stack(
            [X0[i] + t * N[i] for i in range(m + 2)], axis=-1), R))

    lo, hi = _box(m, 0.6)
    return _orient(ImmersionChart(m, amb, phi, lo, hi, order, spec.label()), hint)


def clifford_dims(spec: ExampleSpec) -> tuple[int, int]:
    """Factor dimensions ``(p, q)``; a missing one is ``m`` minus the other."""
    m = spec.get("m")
    p, q = spec.get("p"), spec.get("q")
    if p is None and q is None:
        p = 1
    if p is None:
        p = (int(m) if m is not None else int(q) + 1) - int(q)
    if q is None:
        q = (int(m) if m is not None else int(p) + 2) - int(p)
    return int(p), int(q)


def _clifford(spec: ExampleSpec, order: int) -> ImmersionChart:
    p, q = clifford_dims(spec)
    r1 = float(spec.get("r1", 1 / math.sqrt(2)))
    C = float(spec.get("C", 1.0))
    m = p + q
    if p < 1 or q < 1 or m < 2:
        raise InvalidExample("Clifford family needs p, q >= 1")
    if "m" in spec.params and int(spec.params["m"]) != m:
        raise InvalidExample("Clifford family needs p + q = m")
    if not 0 < r1 < 1:
        raise InvalidExample("Clifford family needs 0 < r1 < 1")
    if C <= 0:
        raise InvalidExample("Clifford family lives in a sphere (C > 0)")
    R, r2 = 1 / math.sqrt(C), math.sqrt(1 - r1 * r1)
    amb = space_form_chart(C, m + 1)

    def embed(x: Jet) -> Jet:
        u = inverse_stereographic(x[..., :p])
        v = inverse_stereographic(x[..., p:])
        return R * _concat(r1 * u, r2 * v)

    def phi(x: Jet) -> Jet:
        return sphere_to_chart(embed(x), R)

    def hint(x0):
        X0 = embed(J.seed(x0, 0)).value
        u0, v0 = X0[: p + 1] / (R * r1), X0[p + 1 :] / (R * r2)
        N = np.concatenate([-r2 * u0, r1 * v0])
        return _direction(lambda t: sphere_to_chart(J.stack(
            [X0[i] + t * N[i] for i in range(m + 2)], axis=-1), R))

    lo, hi = _box(m, 0.6)
    return _orient(ImmersionChart(m, amb, phi, lo, hi, order, spec.label()), hint)


def _euclidean_sphere(spec: ExampleSpec, order: int) -> ImmersionChart:
    m, r = int(spec.get("m", 2)), float(spec.get("r", 1.0))
    if r <= 0:
        raise InvalidExample("radius must be positive")
    amb = space_form_chart(0.0, m + 1)

    def phi(x: Jet) -> Jet:
        return r * inverse_stereographic(x)

    def hint(x0):
        return -phi(J.seed(x0, 0)).value

    lo, hi = _box(m, 0.6)
    return _orient(ImmersionChart(m, amb, phi, lo, hi, order, spec.label()), hint)


def _euclidean_cylinder(spec: ExampleSpec, order: int) -> ImmersionChart:
    m, r, k = int(spec.get("m", 2)), float(spec.get("r", 1.0)), int(spec.get("k", 1))
    if r <= 0 or not 1 <= k < m:
        raise InvalidExample("cylinder needs r > 0 and 1 <= k < m")
    amb = space_form_chart(0.0, m + 1)

    def phi(x: Jet) -> Jet:
        return _concat(r * inverse_stereographic(x[..., :k]), x[..., k:])

    def hint(x0):
        y0 = phi(J.seed(x0, 0)).value
        return -np.concatenate([y0[: k + 1], np.zeros(m - k)])

    lo, hi = _box(m, 0.6)
    return _orient(ImmersionChart(m, amb, phi, lo, hi, order, spec.label()), hint)


def _euclidean_plane(spec: ExampleSpec, order: int) -> ImmersionChart:
    m = int(spec.get("m", 2))
    amb = space_form_chart(0.0, m + 1)

    def phi(x: Jet) -> Jet:
        zero = Jet.zeros(x.shape[:-1], x.num_vars, x.order)
        return _concat(x, J.stack([zero], axis=-1))

    lo, hi = _box(m, 1.0)
    return ImmersionChart(m, amb, phi, lo, hi, order, spec.label())


def graph_coefficients(m: int, seed: int) -> dict[tuple[int, ...], float]:
    rng = np.random.default_rng(seed)
    monos = [c for d in range(4) for c in combinations_with_replacement(range(m), d)]
    vals = rng.uniform(-0.5, 0.5, size=len(monos))
    return dict(zip(monos, vals))


def _graph_ambient(spec: ExampleSpec, m: int) -> AmbientChart:
    kind = spec.get("ambient", "space-form")
    if kind == "product":
        if m + 1 != 4:
            raise InvalidExample("product ambient S^2 x S^2 needs m = 3")
        return product_sphere_chart(2, 2, 1.0)
    if kind != "space-form":
        raise InvalidExample(f"unknown ambient {kind!r}")
    return space_form_chart(float(spec.get("C", 0.0)), m + 1)


def _graph(spec: ExampleSpec, order: int) -> ImmersionChart:
    m, seed = int(spec.get("m", 2)), int(spec.get("seed", 0))
    amb = _graph_ambient(spec, m)
    curved = amb.kind != "space_form" or amb.C != 0
    scale = float(spec.get("scale", 0.25 if curved else 1.0))
    coefs = graph_coefficients(m, seed)

    def phi(x: Jet) -> Jet:
        f = Jet.zeros(x.shape[:-1], x.num_vars, x.order)
        for mono, c in coefs.items():
            term = Jet.constant(np.full(x.shape[:-1], c), x.num_vars, x.order)
            for v in mono:
                term = term * x[..., v]
            f = f + term
        return scale * _concat(x, J.stack([f], axis=-1))

    lo, hi = _box(m, 0.5)
    return ImmersionChart(m, amb, phi, lo, hi, order, spec.label())


def _hyperbolic_geodesic(spec: ExampleSpec, order: int) -> ImmersionChart:
    m, C = int(spec.get("m", 3)), float(spec.get("C", -1.0))
    if C >= 0:
        raise InvalidExample("hyperbolic families need C < 0")
    amb = space_form_chart(C, m + 1)
    R = 1 / math.sqrt(-C)

    def phi(x: Jet) -> Jet:
        zero = Jet.zeros(x.shape[:-1], x.num_vars, x.order)
        return _concat(x, J.stack([zero], axis=-1))

    lo, hi = _box(m, 0.5 * R)
    return ImmersionChart(m, amb, phi, lo, hi, order, spec.label())


def _horosphere(spec: ExampleSpec, order: int) -> ImmersionChart:
    m, C = int(spec.get("m", 3)), float(spec.get("C", -1.0))
    if C >= 0:
        raise InvalidExample("hyperbolic families need C < 0")
    amb = space_form_chart(C, m + 1)
    R = 1 / math.sqrt(-C)

    def half_space(x, t):
        # upper half-space point (x, t) -> ball, via the unit hyperboloid
        r2 = (x * x).sum(axis=-1)
        X0 = (t * t + r2 + 1.0) / (2.0 * t)
        Xn = (t * t + r2 - 1.0) / (2.0 * t)
        Xs = _concat(x / t.expand(-1), J.stack([Xn], axis=-1))
        return R * hyperboloid_to_chart(X0, Xs, 1.0)

    def phi(x: Jet) -> Jet:
        one = Jet.constant(np.ones(x.shape[:-1]), x.num_vars, x.order)
        return half_space(x, one)

    def hint(x0):
        def curve(t):
            xs = J.stack([Jet.constant(v, 1, 1) for v in x0], axis=-1)
            return half_space(xs, 1.0 + t)
        return _direction(curve)

    lo, hi = _box(m, 0.5)
    return _orient(ImmersionChart(m, amb, phi, lo, hi, order, spec.label()), hint)


_BUILDERS = {
    "small-hypersphere": _small_hypersphere,
    "clifford": _clifford,
    "euclidean-sphere": _euclidean_sphere,
    "euclidean-cylinder": _euclidean_cylinder,
    "euclidean-plane": _euclidean_plane,
    "graph": _graph,
    "hyperbolic-geodesic": _hyperbolic_geodesic,
    "horosphere": _horosphere,
}


def make_example(spec: ExampleSpec, order: int = DEFAULT_ORDER) -> ImmersionChart:
    m = spec.get("m")
    if m is not None and int(m) < 2:
        raise InvalidExample("m must be at least 2")
    return _BUILDERS[spec.family](spec, order)


def _verdict(H: float, A2: float, lam: float, tol: float = 1e-8) -> str:
    # same decision rule as the classifier: residual relative to its largest term
    if abs(H) < tol:
        return "Minimal"
    res = abs(H * (A2 - lam))
    if res / (1.0 + abs(H) * max(abs(A2), abs(lam))) < tol:
        return "ProperBiharmonic"
    return "NonBiharmonic"


def expected_invariants(spec: ExampleSpec) -> Expected:
    """Closed-form H, |A|^2, Scal, verdict and normal residual for constant-
    mean-curvature families (the normal residual is ``-H (|A|^2 - lambda)``)."""
    f = spec.family
    if f == "graph":
        raise NoClosedForm("graph hypersurfaces have no closed-form invariants")
    m = int(spec.get("m", 3 if f in ("small-hypersphere", "hyperbolic-geodesic", "horosphere") else 2))
    if f == "small-hypersphere":
        a, C = float(spec.get("a", 1 / math.sqrt(2))), float(spec.get("C", 1.0))
        b = math.sqrt(1 - a * a)
        H = math.sqrt(C) * b / a
        A2 = m * C * b * b / (a * a)
        scal = m * (m - 1) * C / (a * a)
        lam = m * C
    elif f == "clifford":
        p, q = clifford_dims(spec)
        m = p + q
        r1, C = float(spec.get("r1", 1 / math.sqrt(2))), float(spec.get("C", 1.0))
        r2 = math.sqrt(1 - r1 * r1)
        k1, k2 = math.sqrt(C) * r2 / r1, -math.sqrt(C) * r1 / r2
        H = (p * k1 + q * k2) / m
        A2 = p * k1 * k1 + q * k2 * k2
        lam = m * C
        # scalar curvature relation with Scal^N = (m+1) m C and Ric^N(xi, xi) = m C
        scal = m * (m - 1) * C - A2 + m * m * H * H
    elif f == "euclidean-sphere":
        r = float(spec.get("r", 1.0))
        H, A2, scal, lam = 1 / r, m / r**2, m * (m - 1) / r**2, 0.0
    elif f == "euclidean-cylinder":
        r, k = float(spec.get("r", 1.0)), int(spec.get("k", 1))
        H, A2, scal, lam = k / (m * r), k / r**2, k * (k - 1) / r**2, 0.0
    elif f == "euclidean-plane":
        H, A2, scal, lam = 0.0, 0.0, 0.0, 0.0
    elif f == "hyperbolic-geodesic":
        C = float(spec.get("C", -1.0))
        H, A2, scal, lam = 0.0, 0.0, m * (m - 1) * C, m * C
    else:  # horosphere
        C = float(spec.get("C", -1.0))
        H, A2, lam = math.sqrt(-C), -m * C, m * C
        scal = m * (m - 1) * C - A2 + m * m * H * H
    return Expected(H, A2, scal, _verdict(H, A2, lam), -H * (A2 - lam))
