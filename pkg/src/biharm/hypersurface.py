"""Extrinsic and intrinsic geometry of a parametrized hypersurface.

Everything is evaluated from one flat jet of the immersion per base point.
With the immersion jet at order ``K`` (default 5):

* tangent vectors, the induced metric, the unit normal, the second
  fundamental form and hence ``H`` and ``|A|^2`` come out as jets of order
  ``K - 2``;
* the ambient metric and its Christoffel symbols are Taylor-expanded in
  ambient coordinates around ``phi(x)`` and composed with the immersion
  jet, so the ambient chart only has to supply a jet-evaluable metric;
* the intrinsic Christoffel symbols have order ``K - 3`` and the scalar
  field calculus of ``H`` (gradient, Hessian, Laplacian, the Laplacian of
  ``|grad H|^2`` and the gradient of the Laplacian) uses the rest.

All arrays carry a leading batch axis over sample points.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from . import jets as J
from .ambient import (
    AmbientChart,
    GeometryError,
    check_metric,
    christoffel_from_metric,
    curvature_from_christoffel,
)
from .jets import Jet

DEFAULT_ORDER = 5
COND_MAX = 1e8


class DegenerateImmersion(GeometryError):
    pass


class InsufficientJetOrder(ValueError):
    pass


@dataclass(frozen=True)
class ImmersionChart:
    """A map ``phi: U -> N`` from a box ``U`` in ``R^m`` into ambient coordinates.

    ``phi`` takes the coordinate jets with batch shape ``(..., m)`` and
    returns jets with batch shape ``(..., m + 1)``.
    """

    m: int
    ambient: AmbientChart
    phi: Callable[[Jet], Jet] = field(repr=False, compare=False)
    lo: tuple[float, ...] = ()
    hi: tuple[float, ...] = ()
    order: int = DEFAULT_ORDER
    name: str = "immersion"

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("intrinsic dimension must be at least 2")
        if self.ambient.dim != self.m + 1:
            raise ValueError("ambient dimension must be m + 1")
        if len(self.lo) != self.m or len(self.hi) != self.m:
            raise ValueError("sample box must have m sides")

    def __call__(self, points) -> np.ndarray:
        """Ambient coordinates of chart points (plain values)."""
        return self.phi(J.seed(np.asarray(points, dtype=float), 0)).value


def sample_points(im: ImmersionChart, count: int = 50, seed: int = 42, margin: float = 0.1):
    """Scrambled Halton points in the sample box shrunk by ``margin`` per side."""
    lo, hi = np.asarray(im.lo, float), np.asarray(im.hi, float)
    pad = margin * (hi - lo)
    u = qmc.Halton(d=im.m, scramble=True, seed=seed).random(count)
    return qmc.scale(u, lo + pad, hi - pad)


@dataclass
class FundamentalData:
    g: np.ndarray
    g_inv: np.ndarray
    xi: np.ndarray
    b: np.ndarray
    A: np.ndarray  # mixed A^i_j = g^{ik} b_kj
    H: np.ndarray
    A_norm_sq: np.ndarray


@dataclass
class IntrinsicCurvature:
    christoffels: np.ndarray  # [k, i, j] = Gamma^k_ij
    riemann: np.ndarray
    ricci: np.ndarray
    scal: np.ndarray


@dataclass
class ScalarFieldData:
    dH: np.ndarray  # covariant components d_i H
    grad_H: np.ndarray
    grad_H_norm_sq: np.ndarray
    hess_H: np.ndarray
    lap_H: np.ndarray
    lap_grad_norm: np.ndarray
    grad_lap_H: np.ndarray


@dataclass
class IdentityResiduals:
    gauss_res: np.ndarray
    ricci_res: np.ndarray
    scal_res: np.ndarray
    gauss_scale: np.ndarray
    ricci_scale: np.ndarray
    scal_scale: np.ndarray

    def relative(self) -> dict[str, np.ndarray]:
        return {
            "gauss": self.gauss_res / np.maximum(self.gauss_scale, 1.0),
            "ricci": self.ricci_res / np.maximum(self.ricci_scale, 1.0),
            "scal": self.scal_res / np.maximum(self.scal_scale, 1.0),
        }


def _lead(nb: int) -> str:
    return "".join(chr(ord("A") + i) for i in range(nb))


def _laplacian(f: Jet, ginv: Jet, gamma: Jet) -> Jet:
    """Laplace-Beltrami of a scalar jet via the Christoffel contraction."""
    q = f.order - 2
    df = f.gradient()
    hess = J.stack([df.diff(j) for j in range(f.num_vars)], axis=-1)
    P = _lead(len(f.shape))
    hess = hess - J.einsum(f"{P}kij,{P}k->{P}ij", gamma.truncate(q), df.truncate(q))
    return J.einsum(f"{P}ij,{P}ij->{P}", ginv.truncate(q), hess)


def _base_normal(E0: np.ndarray, h0: np.ndarray) -> np.ndarray:
    # unit h-normal with det[d_1 phi, ..., d_m phi, xi] > 0
    _, _, vt = np.linalg.svd(E0)
    nu = vt[..., -1, :]  # euclidean-orthogonal covector
    xi = np.linalg.solve(h0, nu[..., None])[..., 0]
    xi /= np.sqrt(np.einsum("...a,...ab,...b->...", xi, h0, xi))[..., None]
    frame = np.concatenate([np.swapaxes(E0, -1, -2), xi[..., :, None]], axis=-1)
    sign = np.sign(np.linalg.det(frame))
    if np.any(sign == 0):
        raise DegenerateImmersion("tangent frame is singular")
    return xi * sign[..., None]


class Evaluation:
    """Full per-point geometry of an immersion at a batch of chart points.

    ``orientation=-1`` flips the determinant convention for the normal.
    """

    def __init__(self, im: ImmersionChart, points, orientation: int = 1):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[-1] != im.m:
            raise ValueError(f"chart points must have {im.m} coordinates")
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        self.im = im
        self.points = points
        self.orientation = orientation
        K = im.order
        if K < 3:
            raise InsufficientJetOrder("immersion jet order must be at least 3")
        m, n = im.m, im.m + 1
        L = K - 2
        self.order = L

        Y = im.phi(J.seed(points, K))
        if Y.shape[-1] != n:
            raise ValueError(f"phi must return {n} ambient coordinates")
        y0 = np.array(Y.value)
        im.ambient.check_points(y0)
        self.y = y0

        dY = [Y.diff(i) for i in range(m)]
        E = J.stack(dY, axis=-2).truncate(L)  # [P, i, a]
        D2 = J.stack([J.stack([d.diff(j) for j in range(m)], axis=-2) for d in dY], axis=-3)
        # ambient Taylor data at y0, composed back onto the chart
        hA = im.ambient.metric(J.seed(y0, L + 1))
        check_metric(hA.value)
        GA = christoffel_from_metric(hA)
        self.ambient = curvature_from_christoffel(GA, hA.value)
        delta = Y.truncate(L) - y0
        h = J.compose_polynomial(hA.truncate(L), delta)
        Gam = J.compose_polynomial(GA, delta)

        g = J.einsum("Pab,Pia,Pjb->Pij", h, E, E)
        g0 = g.value
        cond = np.linalg.cond(g0)
        if np.any(~np.isfinite(cond)) or np.any(cond > COND_MAX):
            k = int(np.argmax(np.where(np.isfinite(cond), cond, np.inf)))
            raise DegenerateImmersion(f"induced metric is degenerate at chart point {points[k].tolist()}")
        ginv = J.inv(g)

        w = orientation * _base_normal(E.value, h.value)
        t = J.einsum("Pab,Pa,Pib->Pi", h, w, E)
        c = J.einsum("Pij,Pj->Pi", ginv, t)
        wperp = J.einsum("Pi,Pia->Pa", c, E)
        wperp = Jet.constant(w, m, L) - wperp
        norm = J.sqrt(J.einsum("Pab,Pa,Pb->P", h, wperp, wperp))
        xi = wperp / norm.expand(-1)

        acc = D2 + J.einsum("Pacd,Pic,Pjd->Pija", Gam, E, E)
        b = J.einsum("Pab,Pija,Pb->Pij", h, acc, xi)
        A = J.einsum("Pik,Pkj->Pij", ginv, b)
        H = _trace(A) / m
        Anorm = J.einsum("Pij,Pji->P", A, A)

        self._E, self._h, self._g, self._ginv = E, h, g, ginv
        self._H = H
        self.tangents = E.value
        self.fundamental = FundamentalData(
            g=g0, g_inv=ginv.value, xi=xi.value, b=b.value, A=A.value, H=H.value,
            A_norm_sq=Anorm.value,
        )

        gam = christoffel_from_metric(g)  # order L - 1
        self._gamma = gam
        ic = curvature_from_christoffel(gam, g0)
        self.intrinsic = IntrinsicCurvature(ic.christoffels, ic.riemann, ic.ricci, ic.scal)

        self.scalar = self._scalar_fields() if L >= 3 else None

    def _scalar_fields(self) -> ScalarFieldData:
        H, ginv, gam = self._H, self._ginv, self._gamma
        m = self.im.m
        q = H.order - 2
        dH = H.gradient()  # order L-1
        hess = J.stack([dH.diff(j) for j in range(m)], axis=-1)
        hess = hess - J.einsum("Pkij,Pk->Pij", gam.truncate(q), dH.truncate(q))
        lap = J.einsum("Pij,Pij->P", ginv.truncate(q), hess)
        gn = J.einsum("Pij,Pi,Pj->P", ginv.truncate(q + 1), dH, dH)
        lap_gn = _laplacian(gn, ginv, gam)
        dlap = lap.gradient()
        gi0 = ginv.value
        return ScalarFieldData(
            dH=dH.value,
            grad_H=np.einsum("Pij,Pj->Pi", gi0, dH.value),
            grad_H_norm_sq=gn.value,
            hess_H=hess.value,
            lap_H=lap.value,
            lap_grad_norm=lap_gn.value,
            grad_lap_H=np.einsum("Pij,Pj->Pi", gi0, dlap.value),
        )

    def require_scalar(self) -> ScalarFieldData:
        if self.scalar is None:
            raise InsufficientJetOrder(
                f"scalar-field data needs immersion jet order >= 5 (have {self.im.order})"
            )
        return self.scalar

    # -- identities -------------------------------------------------------------
    def identity_residuals(self) -> IdentityResiduals:
        fd, E, amb = self.fundamental, self.tangents, self.ambient
        m = self.im.m
        b, A, xi, H = fd.b, fd.A, fd.xi, fd.H
        RN = np.einsum("Pabcd,Pia,Pjb,Pkc,Pld->Pijkl", amb.riemann, E, E, E, E)
        bb = np.einsum("Pil,Pjk->Pijkl", b, b) - np.einsum("Pik,Pjl->Pijkl", b, b)
        RM = self.intrinsic.riemann
        gauss = np.abs(RN - (RM + bb)).reshape(len(H), -1).max(axis=1)
        gscale = np.max(np.abs(np.stack([RN, RM, bb])).reshape(3, len(H), -1), axis=(0, 2))

        ricN = np.einsum("Pab,Pia,Pjb->Pij", amb.ricci, E, E)
        AA = np.einsum("Pik,Pkj->Pij", b, A)
        mHb = m * H[:, None, None] * b
        RxiN = np.einsum("Pabcd,Pia,Pb,Pjc,Pd->Pij", amb.riemann, E, xi, E, xi)
        ricM = self.intrinsic.ricci
        ricci = np.abs(ricN - (ricM + AA - mHb + RxiN)).reshape(len(H), -1).max(axis=1)
        rscale = np.max(np.abs(np.stack([ricN, ricM, AA, mHb, RxiN])).reshape(5, len(H), -1), axis=(0, 2))

        ric_xx = self.ric_normal()
        scal_terms = np.stack([amb.scal, self.intrinsic.scal, fd.A_norm_sq, m**2 * H**2, 2 * ric_xx])
        scal = np.abs(amb.scal - (self.intrinsic.scal + fd.A_norm_sq - m**2 * H**2 + 2 * ric_xx))
        return IdentityResiduals(gauss, ricci, scal, gscale, rscale, np.abs(scal_terms).max(axis=0))

    def ric_normal(self) -> np.ndarray:
        """``Ric^N(xi, xi)``."""
        xi = self.fundamental.xi
        return np.einsum("Pab,Pa,Pb->P", self.ambient.ricci, xi, xi)

    def ric_normal_tangent(self) -> np.ndarray:
        """Chart components of the tangential part of ``Ric^N(xi)``."""
        fd = self.fundamental
        v = np.einsum("Pab,Pb->Pa", self.ambient.ricci_operator, fd.xi)
        t = np.einsum("Pab,Pa,Pib->Pi", self._h.value, v, self.tangents)
        return np.einsum("Pij,Pj->Pi", fd.g_inv, t)

    def hessian_norm_sq(self) -> np.ndarray:
        s = self.require_scalar()
        gi = self.fundamental.g_inv
        return np.einsum("Pik,Pjl,Pij,Pkl->P", gi, gi, s.hess_H, s.hess_H)

    def bochner_terms(self) -> dict[str, np.ndarray]:
        s = self.require_scalar()
        return {
            "half_lap_grad_norm": 0.5 * s.lap_grad_norm,
            "hess_norm_sq": self.hessian_norm_sq(),
            "ric_grad": np.einsum("Pij,Pi,Pj->P", self.intrinsic.ricci, s.grad_H, s.grad_H),
            "grad_dot_grad_lap": np.einsum("Pi,Pi->P", s.dH, s.grad_lap_H),
        }

    def bochner_residual(self) -> np.ndarray:
        t = self.bochner_terms()
        return t["half_lap_grad_norm"] - (t["hess_norm_sq"] + t["ric_grad"] + t["grad_dot_grad_lap"])

    def bochner_scale(self) -> np.ndarray:
        return np.max(np.abs(np.stack(list(self.bochner_terms().values()))), axis=0)

    def hessian_margin(self) -> np.ndarray:
        """``|Hess H|^2 - (Delta H)^2 / m``; non-negative by Cauchy-Schwarz."""
        s = self.require_scalar()
        return self.hessian_norm_sq() - s.lap_H**2 / self.im.m

    def newton_margin(self) -> np.ndarray:
        fd = self.fundamental
        return fd.A_norm_sq - self.im.m * fd.H**2


def _trace(A: Jet) -> Jet:
    k = A.shape[-1]
    return J.stack([A[..., i, i] for i in range(k)], axis=-1).sum(axis=-1)


def evaluate(im: ImmersionChart, points, orientation: int = 1) -> Evaluation:
    return Evaluation(im, points, orientation)


def fundamental_forms(im: ImmersionChart, x, orientation: int = 1) -> FundamentalData:
    return evaluate(im, x, orientation).fundamental


def intrinsic_curvature(im: ImmersionChart, x) -> IntrinsicCurvature:
    return evaluate(im, x).intrinsic


def curvature_identity_residuals(im: ImmersionChart, x) -> IdentityResiduals:
    return evaluate(im, x).identity_residuals()


def scalar_field_data(im: ImmersionChart, x) -> ScalarFieldData:
    if im.order < 5:
        raise InsufficientJetOrder(f"scalar-field data needs jet order >= 5 (have {im.order})")
    return evaluate(im, x).require_scalar()


def bochner_residual(im: ImmersionChart, x) -> np.ndarray:
    if im.order < 5:
        raise InsufficientJetOrder(f"Bochner data needs jet order >= 5 (have {im.order})")
    return evaluate(im, x).bochner_residual()
