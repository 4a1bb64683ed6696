"""Reference computations that do not share code with the package.

Finite differences work on plain float callables; closed forms are written
out from textbook geometry.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

# central stencils (offsets -2..2) for derivatives of order 0..3, error O(h^2)
_STENCILS = {
    0: np.array([0.0, 0.0, 1.0, 0.0, 0.0]),
    1: np.array([0.0, -0.5, 0.0, 0.5, 0.0]),
    2: np.array([0.0, 1.0, -2.0, 1.0, 0.0]),
    3: np.array([-0.5, 1.0, 0.0, -1.0, 0.5]),
}
_OFFSETS = np.arange(-2, 3)


def _fd(f, x, alpha, h):
    x = np.asarray(x, dtype=float)
    total = 0.0
    active = [(i, a) for i, a in enumerate(alpha) if a > 0]
    if not active:
        return float(f(x))
    weights = [[(o, w) for o, w in zip(_OFFSETS, _STENCILS[a]) if w != 0.0] for _, a in active]
    for combo in itertools.product(*weights):
        pt = x.copy()
        w = 1.0
        for (i, _), (o, wi) in zip(active, combo):
            pt[i] += o * h
            w *= wi
        total += w * f(pt)
    return total / h ** sum(alpha)


def fd_derivative(f, x, alpha, h=None) -> float:
    """Mixed partial ``d^alpha f(x)`` by tensor-product central differences
    with one Richardson step (error O(h^4))."""
    k = sum(alpha)
    if h is None:
        h = {0: 1.0, 1: 1e-3, 2: 5e-3, 3: 1e-2}[k]
    d1 = _fd(f, x, alpha, h)
    d2 = _fd(f, x, alpha, h / 2)
    return (4.0 * d2 - d1) / 3.0


def d1_5pt(f, x, i, h):
    """Fourth-order 5-point central first derivative along axis ``i``."""
    e = np.zeros_like(x)
    e[i] = h
    return (f(x - 2 * e) - 8 * f(x - e) + 8 * f(x + e) - f(x + 2 * e)) / (12 * h)


def laplace_beltrami_fd(u, metric, x, h=1e-2):
    """``(1/sqrt G) d_i (sqrt G g^{ij} d_j u)`` with nested 5-point differences.

    ``u`` maps a chart point to a float and ``metric`` to the ``m x m``
    induced metric.
    """
    x = np.asarray(x, dtype=float)
    m = len(x)

    def flux(p, i):
        g = metric(p)
        gi = np.linalg.inv(g)
        du = np.array([d1_5pt(u, p, j, h) for j in range(m)])
        return math.sqrt(np.linalg.det(g)) * gi[i] @ du

    div = sum(d1_5pt(lambda p, i=i: flux(p, i), x, i, h) for i in range(m))
    return div / math.sqrt(np.linalg.det(metric(x)))


# -- closed forms -----------------------------------------------------------------

def space_form_riemann(C: float, h: np.ndarray) -> np.ndarray:
    """``R(X,Y,Z,W) = C (h(X,Z) h(Y,W) - h(X,W) h(Y,Z))`` as a 4-tensor."""
    return C * (np.einsum("xz,yw->xyzw", h, h) - np.einsum("xw,yz->xyzw", h, h))


def conformal_metric(C: float, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return np.eye(len(y)) / (1.0 + C * (y @ y) / 4.0) ** 2


def paraboloid_mean_curvature(x: np.ndarray) -> float:
    """``m H`` of ``x -> (x, |x|^2 / 2)`` with the upward normal, divided by ``m``."""
    x = np.asarray(x, dtype=float)
    m = len(x)
    r2 = x @ x
    # mH = ((1 + |df|^2) lap f - df^T hess f df) / (1 + |df|^2)^{3/2}
    return ((1 + r2) * m - r2) / (1 + r2) ** 1.5 / m


def paraboloid_metric(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.eye(len(x)) + np.outer(x, x)


def small_sphere_invariants(m: int, a: float, C: float = 1.0):
    """Umbilic sphere of Euclidean radius ``a`` in the round sphere of radius
    ``1/sqrt(C)``: principal curvature ``sqrt(C) sqrt(1-a^2)/a``."""
    k = math.sqrt(C) * math.sqrt(1 - a * a) / a
    return {"H": k, "A_norm_sq": m * k * k, "Scal": m * (m - 1) * C / (a * a)}


def clifford_invariants(p: int, q: int, r1: float, C: float = 1.0):
    r2 = math.sqrt(1 - r1 * r1)
    k1, k2 = math.sqrt(C) * r2 / r1, -math.sqrt(C) * r1 / r2
    m = p + q
    # product of round spheres of radii r1/sqrt(C), r2/sqrt(C)
    scal = C * (p * (p - 1) / r1**2 + q * (q - 1) / r2**2)
    return {"H": (p * k1 + q * k2) / m, "A_norm_sq": p * k1**2 + q * k2**2, "Scal": scal}
