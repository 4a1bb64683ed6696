"""Coordinate models of the ambient space and their curvature.

Curvature conventions::

    R(Z, W)Y        = D_Z D_W Y - D_W D_Z Y - D_[Z,W] Y
    R(X, Y, Z, W)   = <R(Z, W)Y, X>
    Ric(X, Y)       = sum_i R(X, e_i, Y, e_i)

With these, the unit sphere has ``Ric = m h`` in dimension ``m + 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jets as J
from .jets import Jet

EPS_DOMAIN = 1e-3
R_MAX = 10.0
COND_MAX = 1e8


class GeometryError(ValueError):
    """Base class for degenerate geometric configurations."""


class AmbientDomainError(GeometryError):
    pass


class SingularMetricError(GeometryError):
    pass


@dataclass(frozen=True)
class AmbientChart:
    """Coordinate chart of ``(N^n, h)``.

    ``metric`` maps a jet with batch shape ``(..., n)`` (the coordinates)
    to the metric jet with batch shape ``(..., n, n)``. ``kind`` is one of
    ``"space_form"``, ``"einstein"`` or ``"generic"``.
    """

    dim: int
    metric: Callable[[Jet], Jet] = field(repr=False, compare=False)
    kind: str = "generic"
    C: float | None = None
    lam: float | None = None
    guard: Callable[[np.ndarray], np.ndarray] | None = field(
        default=None, repr=False, compare=False
    )
    name: str = "generic"

    @property
    def einstein_constant(self) -> float | None:
        if self.kind == "space_form":
            return (self.dim - 1) * self.C
        if self.kind == "einstein":
            return self.lam
        return None

    def admissible(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        ok = np.all(np.isfinite(points), axis=-1)
        if self.guard is not None:
            ok &= self.guard(points)
        return ok

    def check_points(self, points) -> None:
        ok = self.admissible(points)
        if not np.all(ok):
            bad = np.asarray(points)[~ok][0]
            raise AmbientDomainError(f"point {bad.tolist()} outside the {self.name} chart")


def _conformal_block(y: Jet, C: float) -> Jet:
    # conformal factor 1 / (1 + C/4 |y|^2)^2 of the stereographic/Poincare model
    s = (y * y).sum(axis=-1)
    return J.power(1.0 + (C / 4.0) * s, -2.0)


def _ball_guard(C: float, lo: int = 0, hi: int | None = None):
    def guard(pts: np.ndarray) -> np.ndarray:
        blk = pts[..., lo:hi]
        r2 = np.sum(blk * blk, axis=-1)
        ok = 1.0 + (C / 4.0) * r2 > EPS_DOMAIN
        if C > 0:
            ok &= np.sqrt(r2) < R_MAX / np.sqrt(C)
        return ok

    return guard


def _diag_metric(factors: list[tuple[Jet, int]], n: int) -> Jet:
    # factors: (scalar jet, block size) in order along the diagonal
    first = factors[0][0]
    c = np.zeros(first.shape + (n, n, first.space.size))
    k = 0
    for f, size in factors:
        for _ in range(size):
            c[..., k, k, :] = f.coeffs
            k += 1
    return Jet(c, first.space)


def space_form_chart(C: float, n: int) -> AmbientChart:
    """Conformal-ball chart of the space form of curvature ``C`` and dimension ``n``.

    ``h = delta / (1 + C |y|^2 / 4)^2``; ``C > 0`` is the stereographic
    sphere chart (antipode excluded), ``C < 0`` the Poincare ball.
    """
    if n < 3:
        raise ValueError("ambient dimension must be at least 3")
    C = float(C)

    def metric(y: Jet) -> Jet:
        return _diag_metric([(_conformal_block(y, C), n)], n)

    if C > 0:
        name = f"S^{n}({C:g})"
    elif C < 0:
        name = f"H^{n}({C:g})"
    else:
        name = f"R^{n}"
    return AmbientChart(n, metric, "space_form", C=C, guard=_ball_guard(C), name=name)


def product_sphere_chart(p_dim: int, q_dim: int, r: float = 1.0) -> AmbientChart:
    """``S^p(r) x S^q(r)`` with each factor in its stereographic chart."""
    if p_dim != q_dim:
        raise ValueError("factor dimensions must agree for the product to be Einstein")
    if p_dim < 2:
        raise ValueError("factor dimension must be at least 2")
    C = 1.0 / r**2
    n = p_dim + q_dim

    def metric(y: Jet) -> Jet:
        f1 = _conformal_block(y[..., :p_dim], C)
        f2 = _conformal_block(y[..., p_dim:], C)
        return _diag_metric([(f1, p_dim), (f2, q_dim)], n)

    g1, g2 = _ball_guard(C, 0, p_dim), _ball_guard(C, p_dim, None)
    return AmbientChart(
        n,
        metric,
        "einstein",
        lam=(p_dim - 1) / r**2,
        guard=lambda pts: g1(pts) & g2(pts),
        name=f"S^{p_dim}({r:g})xS^{q_dim}({r:g})",
    )


def generic_chart(n: int, metric: Callable[[Jet], Jet], guard=None, name="generic") -> AmbientChart:
    """Wrap a user-supplied jet-evaluable metric."""
    return AmbientChart(n, metric, "generic", guard=guard, name=name)


# -- connection and curvature ----------------------------------------------------

def check_metric(h0: np.ndarray) -> None:
    cond = np.linalg.cond(h0)
    if np.any(~np.isfinite(cond)) or np.any(cond > COND_MAX):
        raise SingularMetricError(f"metric condition number {np.max(cond):.3g} exceeds {COND_MAX:g}")
    eig = np.linalg.eigvalsh(0.5 * (h0 + np.swapaxes(h0, -1, -2)))
    if np.any(eig <= 0):
        raise SingularMetricError("metric is not positive definite")


def christoffel_from_metric(h: Jet) -> Jet:
    """Levi-Civita symbols ``G[..., a, b, c] = Gamma^a_{bc}`` from a metric jet.

    The metric jet is taken in the chart's own variables; the result has
    order one less.
    """
    n = h.num_vars
    dh = J.stack([h.diff(k) for k in range(n)], axis=-1)  # [.., d, c, k] = d_k h_dc
    # S_dbc = d_b h_dc + d_c h_db - d_d h_bc
    s = dh.swapaxes(-1, -2) + dh - _move_first_to_last(dh)
    hinv = J.inv(h.truncate(h.order - 1))
    lead = "".join(chr(ord("A") + i) for i in range(len(h.shape) - 2))
    return 0.5 * J.einsum(f"{lead}ad,{lead}dbc->{lead}abc", hinv, s)


def _move_first_to_last(t: Jet) -> Jet:
    # t[.., d, c, k] -> u[.., d, b, c] = t[.., b, c, d]: u = transpose (k, d, c)
    c = t.coeffs
    nb = c.ndim - 1
    perm = list(range(nb - 3)) + [nb - 1, nb - 3, nb - 2, nb]
    return Jet(np.transpose(c, perm), t.space)


@dataclass
class AmbientCurvature:
    christoffels: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    ricci_operator: np.ndarray
    scal: np.ndarray


def curvature_from_christoffel(gamma: Jet, g0: np.ndarray) -> AmbientCurvature:
    """Riemann, Ricci and scalar curvature at the base point(s).

    ``gamma`` must have order >= 1 (first derivatives are needed); ``g0``
    is the metric value with matching batch shape.
    """
    n = gamma.num_vars
    G = gamma.value
    dG = np.stack([gamma.diff(k).value for k in range(n)], axis=-1)  # [e,b,c,k]
    # R^e_{yzw} = d_z G^e_{wy} - d_w G^e_{zy} + G^e_{zf} G^f_{wy} - G^e_{wf} G^f_{zy}
    rup = (
        np.einsum("...ewyz->...eyzw", dG)
        - np.einsum("...ezyw->...eyzw", dG)
        + np.einsum("...ezf,...fwy->...eyzw", G, G)
        - np.einsum("...ewf,...fzy->...eyzw", G, G)
    )
    riem = np.einsum("...xe,...eyzw->...xyzw", g0, rup)
    ginv = np.linalg.inv(g0)
    ric = np.einsum("...bd,...xbzd->...xz", ginv, riem)
    scal = np.einsum("...xz,...xz->...", ginv, ric)
    op = np.einsum("...ac,...cb->...ab", ginv, ric)
    return AmbientCurvature(G, riem, ric, op, scal)


def metric_jet(chart: AmbientChart, points, order: int) -> Jet:
    points = np.asarray(points, dtype=float)
    chart.check_points(points)
    h = chart.metric(J.seed(points, order))
    check_metric(h.value)
    return h


def ambient_connection(chart: AmbientChart, point, order: int = 1) -> Jet:
    """Christoffel jets of order ``order`` in the ambient coordinates at ``point``."""
    h = metric_jet(chart, point, order + 1)
    return christoffel_from_metric(h)


def ambient_curvature(chart: AmbientChart, point) -> AmbientCurvature:
    h = metric_jet(chart, point, 2)
    return curvature_from_christoffel(christoffel_from_metric(h), h.value)
