"""Biharmonicity residuals, classification and theorem audits.

For a hypersurface with unit normal ``xi`` and mean curvature ``H`` the
biharmonic system reads::

    Delta H - H |A|^2 + H Ric^N(xi, xi)                        = 0   (normal)
    2 A(grad H) + (m/2) grad H^2 - 2 H (Ric^N(xi))^T           = 0   (tangent)

In an Einstein ambient (``Ric^N = lambda h``) it reduces to
``Delta H = H (|A|^2 - lambda)`` and ``A(grad H) = -(m/2) H grad H``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hypersurface import Evaluation, ImmersionChart, evaluate


class AuditNotApplicable(ValueError):
    pass


class WrongAmbient(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    tol_res: float = 1e-8
    tol_H: float = 1e-8
    rtol: float = 1e-7
    atol: float = 1e-10
    tol_einstein: float = 1e-8

    def close(self, a: float, b: float) -> bool:
        return abs(a - b) <= self.atol + self.rtol * max(abs(a), abs(b))

    def bound(self, a: float, b: float) -> float:
        return self.atol + self.rtol * max(abs(a), abs(b))


@dataclass
class BiharmonicResidual:
    normal_res: np.ndarray
    tangent_res: np.ndarray  # chart components
    norm: np.ndarray
    scale: np.ndarray  # largest term magnitude, for relative comparisons

    @property
    def scaled_norm(self) -> np.ndarray:
        return self.norm / (1.0 + self.scale)

    @property
    def tangent_norm(self) -> np.ndarray:
        return np.sqrt(np.maximum(self._tangent_sq, 0.0))

    _tangent_sq: np.ndarray = field(default=None, repr=False)


def _as_eval(im_or_ev, x=None) -> Evaluation:
    if isinstance(im_or_ev, Evaluation):
        return im_or_ev
    return evaluate(im_or_ev, x)


def biharmonic_residual(im: ImmersionChart | Evaluation, x=None) -> BiharmonicResidual:
    ev = _as_eval(im, x)
    s = ev.require_scalar()
    fd = ev.fundamental
    m = ev.im.m
    H = fd.H
    g = fd.g
    ric_xx = ev.ric_normal()
    normal = s.lap_H - H * fd.A_norm_sq + H * ric_xx

    A_grad = 2.0 * np.einsum("Pij,Pj->Pi", fd.A, s.grad_H)
    grad_H2 = m * H[:, None] * s.grad_H  # (m/2) grad H^2
    ric_t = 2.0 * H[:, None] * ev.ric_normal_tangent()
    tangent = A_grad + grad_H2 - ric_t

    def gnorm(v):
        return np.sqrt(np.maximum(np.einsum("Pi,Pij,Pj->P", v, g, v), 0.0))

    tsq = np.einsum("Pi,Pij,Pj->P", tangent, g, tangent)
    norm = np.sqrt(normal**2 + np.maximum(tsq, 0.0))
    scale = np.max(
        np.abs(np.stack([s.lap_H, H * fd.A_norm_sq, H * ric_xx, gnorm(A_grad), gnorm(grad_H2), gnorm(ric_t)])),
        axis=0,
    )
    return BiharmonicResidual(normal, tangent, norm, scale, _tangent_sq=tsq)


@dataclass
class EinsteinDeviation:
    max_dev: float
    is_einstein: bool
    mu_hat: float
    scal_spread: float


def einstein_deviation(im: ImmersionChart | Evaluation, samples=None, tol: float = 1e-8) -> EinsteinDeviation:
    ev = _as_eval(im, samples)
    if len(ev.points) < 2:
        raise ValueError("einstein_deviation needs at least two sample points")
    m = ev.im.m
    scal = ev.intrinsic.scal
    mu = scal / m
    dev = np.abs(ev.intrinsic.ricci - mu[:, None, None] * ev.fundamental.g).reshape(len(mu), -1).max(axis=1)
    spread = float(np.max(mu) - np.min(mu))
    max_dev = float(np.max(dev)) + spread
    return EinsteinDeviation(max_dev, bool(max_dev < tol), float(np.mean(mu)), spread)


@dataclass
class ClassificationVerdict:
    verdict: str
    evidence: dict


def classify(im: ImmersionChart | Evaluation, samples=None, tolerances: Tolerances = Tolerances()) -> ClassificationVerdict:
    ev = _as_eval(im, samples)
    if len(ev.points) < 10:
        raise ValueError("classify needs at least 10 sample points")
    res = biharmonic_residual(ev)
    fd = ev.fundamental
    ein = einstein_deviation(ev, tol=tolerances.tol_einstein)
    max_H = float(np.max(np.abs(fd.H)))
    scaled = res.scaled_norm
    if max_H < tolerances.tol_H:
        verdict = "Minimal"
    elif np.max(scaled) < tolerances.tol_res:
        verdict = "ProperBiharmonic"
    elif np.min(scaled) > 10 * tolerances.tol_res:
        verdict = "NonBiharmonic"
    else:
        verdict = "Inconclusive"
    evidence = {
        "max_abs_H": max_H,
        "mean_H": float(np.mean(fd.H)),
        "H_stddev": float(np.std(fd.H)),
        "mean_A_norm_sq": float(np.mean(fd.A_norm_sq)),
        "mean_scal": float(np.mean(ev.intrinsic.scal)),
        "scal_stddev": float(np.std(ev.intrinsic.scal)),
        "max_residual_norm": float(np.max(scaled)),
        "min_residual_norm": float(np.min(scaled)),
        "max_abs_residual_norm": float(np.max(res.norm)),
        "mean_normal_res": float(np.mean(res.normal_res)),
        "einstein_deviation": ein.max_dev,
        "mu_hat": ein.mu_hat,
        "samples": int(len(ev.points)),
    }
    return ClassificationVerdict(verdict, evidence)


def h_is_constant(H: np.ndarray, tol_H: float) -> bool:
    return bool(np.std(H) < tol_H * (1.0 + np.mean(np.abs(H))))


# -- theorem audit ---------------------------------------------------------------

@dataclass
class Assertion:
    name: str
    anchor: str
    passed: bool | None  # None: not applicable
    value: float | None = None
    tolerance: float | None = None
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "pass": self.passed,
            "value": self.value,
            "tolerance": self.tolerance,
            "note": self.note,
        }


@dataclass
class AuditReport:
    verdict: ClassificationVerdict
    assertions: list[Assertion]

    @property
    def passed(self) -> bool:
        return all(a.passed is not False for a in self.assertions)

    def applicable(self) -> list[Assertion]:
        return [a for a in self.assertions if a.passed is not None]


def _na(name, anchor, why) -> Assertion:
    return Assertion(name, anchor, None, note=f"not applicable: {why}")


def _cmp(tol: Tolerances, name, anchor, a, b) -> Assertion:
    a, b = float(a), float(b)
    return Assertion(name, anchor, tol.close(a, b), abs(a - b), tol.bound(a, b))


def theorem_audit(im: ImmersionChart | Evaluation, samples=None, tolerances: Tolerances = Tolerances()) -> AuditReport:
    """Check the classification statements that apply to this example.

    Every statement is reported, as pass/fail or as not applicable with the
    unmet hypothesis named. Compactness and completeness are not checked.
    """
    ev = _as_eval(im, samples)
    amb = ev.im.ambient
    if amb.kind not in ("space_form", "einstein"):
        raise AuditNotApplicable(f"ambient {amb.name} is neither a space form nor Einstein")
    tol = tolerances
    m = ev.im.m
    cv = classify(ev, tolerances=tol)
    e = cv.evidence
    verdict = cv.verdict
    fd = ev.fundamental
    H_mean = float(np.mean(fd.H))
    A2 = e["mean_A_norm_sq"]
    scal = e["mean_scal"]
    ein = e["einstein_deviation"] < tol.tol_einstein
    const_scal = e["scal_stddev"] < tol.tol_einstein * (1.0 + abs(scal))
    const_H = h_is_constant(fd.H, tol.tol_H)
    minimal = verdict == "Minimal"
    proper = verdict == "ProperBiharmonic"
    biharmonic = verdict in ("Minimal", "ProperBiharmonic")
    out: list[Assertion] = []

    anchor = "H = 0 implies the biharmonic system holds"
    if minimal:
        out.append(Assertion("minimal_is_biharmonic", anchor, e["max_residual_norm"] < tol.tol_res,
                             e["max_residual_norm"], tol.tol_res))
    else:
        out.append(_na("minimal_is_biharmonic", anchor, f"verdict {verdict}"))

    # Einstein hypersurface in a space form (m >= 3)
    anchor = "Einstein M^m in N^{m+1}(C), m >= 3: biharmonic iff minimal or |A|^2 = mC"
    pre = []
    if amb.kind != "space_form":
        pre.append("ambient is not a space form")
    if m < 3:
        pre.append("m < 3")
    if not ein:
        pre.append("hypersurface is not Einstein")
    if verdict == "Inconclusive":
        pre.append("verdict inconclusive")
    if pre:
        out.append(_na("einstein_in_space_form.iff", anchor, "; ".join(pre)))
    else:
        C = amb.C
        predicted = e["max_abs_H"] < tol.tol_H or tol.close(A2, m * C)
        out.append(Assertion("einstein_in_space_form.iff", anchor, predicted == biharmonic,
                             abs(A2 - m * C), tol.bound(A2, m * C)))
    names = ("einstein_in_space_form.A_norm_sq", "einstein_in_space_form.scal", "einstein_in_space_form.scal_positive")
    anchors = ("|A|^2 = mC", "Scal^M = m(m-2)C + m^2 H^2", "Scal^M > 0")
    if pre or not proper:
        why = "; ".join(pre) if pre else f"verdict {verdict}"
        out.extend(_na(n, a, why) for n, a in zip(names, anchors))
    else:
        C = amb.C
        out.append(_cmp(tol, names[0], anchors[0], A2, m * C))
        out.append(_cmp(tol, names[1], anchors[1], scal, m * (m - 2) * C + m * m * H_mean**2))
        out.append(Assertion(names[2], anchors[2], scal > 0, scal, 0.0))

    # constant scalar curvature hypersurface in a sphere
    anchor = "constant Scal^M in S^{m+1}: biharmonic iff minimal or (H constant != 0 and |A|^2 = m)"
    pre = []
    if amb.kind != "space_form" or not amb.C > 0:
        pre.append("ambient is not a sphere")
    if not const_scal:
        pre.append("scalar curvature not constant")
    if verdict == "Inconclusive":
        pre.append("verdict inconclusive")
    if pre:
        out.append(_na("const_scal_in_sphere.iff", anchor, "; ".join(pre)))
    else:
        C = amb.C
        predicted = e["max_abs_H"] < tol.tol_H or (const_H and tol.close(A2, m * C))
        out.append(Assertion("const_scal_in_sphere.iff", anchor, predicted == biharmonic,
                             abs(A2 - m * C), tol.bound(A2, m * C)))
    names = ("const_scal_in_sphere.H_constant", "const_scal_in_sphere.A_norm_sq")
    anchors = ("H constant", "|A|^2 = m")
    if pre or not proper:
        why = "; ".join(pre) if pre else f"verdict {verdict}"
        out.extend(_na(n, a, why) for n, a in zip(names, anchors))
    else:
        bound = tol.tol_H * (1.0 + e["max_abs_H"])
        out.append(Assertion(names[0], anchors[0], e["H_stddev"] < bound, e["H_stddev"], bound))
        out.append(_cmp(tol, names[1], anchors[1], A2, m * amb.C))

    # Einstein hypersurface in an Einstein manifold
    anchor = "Einstein M^m in Einstein N with Ric^N = lambda h: biharmonic iff minimal or |A|^2 = lambda"
    lam = amb.einstein_constant
    pre = []
    if not ein:
        pre.append("hypersurface is not Einstein")
    if verdict == "Inconclusive":
        pre.append("verdict inconclusive")
    if pre:
        out.append(_na("einstein_in_einstein.iff", anchor, "; ".join(pre)))
    else:
        predicted = e["max_abs_H"] < tol.tol_H or tol.close(A2, lam)
        out.append(Assertion("einstein_in_einstein.iff", anchor, predicted == biharmonic,
                             abs(A2 - lam), tol.bound(A2, lam)))
    names = ("einstein_in_einstein.A_norm_sq", "einstein_in_einstein.scal", "einstein_in_einstein.scal_positive")
    anchors = ("|A|^2 = lambda", "Scal^M = (m-2) lambda + m^2 H^2", "Scal^M > 0")
    if pre or not proper:
        why = "; ".join(pre) if pre else f"verdict {verdict}"
        out.extend(_na(n, a, why) for n, a in zip(names, anchors))
    else:
        out.append(_cmp(tol, names[0], anchors[0], A2, lam))
        out.append(_cmp(tol, names[1], anchors[1], scal, (m - 2) * lam + m * m * H_mean**2))
        out.append(Assertion(names[2], anchors[2], scal > 0, scal, 0.0))
    return AuditReport(cv, out)


# -- pointwise inequality diagnostics -----------------------------------------------

def prop_eps_bound(m: int, epsilon: float) -> float:
    """Lower bound on H^2 giving ``Delta |grad H|^2 >= eps |grad H|^2``."""
    return (2 * epsilon + 4) / (m * (5 * m + 4))


def inequality_diagnostics(
    im: ImmersionChart | Evaluation,
    x=None,
    epsilon: float = 1.0,
    constant_scal: bool = False,
    tolerances: Tolerances = Tolerances(),
) -> dict[str, np.ndarray | float]:
    """Per-point margins of the inequalities used for biharmonic hypersurfaces.

    Entries are NaN where the hypotheses behind a formula do not hold:

    ``ric_formula_res``
        ``Ric(grad H, grad H) - ((m-1)C - 3/4 m^2 H^2) |grad H|^2``, only where
        the tangent equation is satisfied.
    ``bochner_lb_margin``
        ``1/2 Delta|grad H|^2 - [(Delta H)^2/m + (|A|^2 - C + 5/4 m^2 H^2)|grad H|^2]``
        for sphere ambients and constant scalar curvature (C = 1 gives the
        unit-sphere form).
    ``nonpos_lb_margin``
        ``Delta|grad H|^2 - 2 (5/4 m^2 H^2 + |A|^2) |grad H|^2`` for ``C <= 0``
        and constant scalar curvature.
    ``prop_eps_margin``
        ``Delta|grad H|^2 - eps |grad H|^2`` where ``H^2 >= prop_eps_bound``.
    """
    ev = _as_eval(im, x)
    amb = ev.im.ambient
    if amb.kind != "space_form":
        raise WrongAmbient(f"space-form formulas requested on {amb.name}")
    C = amb.C
    m = ev.im.m
    s = ev.require_scalar()
    fd = ev.fundamental
    H, A2 = fd.H, fd.A_norm_sq
    gn = s.grad_H_norm_sq
    res = biharmonic_residual(ev)
    tangent_ok = res.tangent_norm / (1.0 + res.scale) < tolerances.tol_res
    ric_grad = np.einsum("Pij,Pi,Pj->P", ev.intrinsic.ricci, s.grad_H, s.grad_H)
    nan = np.full_like(H, np.nan)

    ric_res = np.where(tangent_ok, ric_grad - ((m - 1) * C - 0.75 * m * m * H**2) * gn, np.nan)
    if C > 0 and constant_scal:
        lb = s.lap_H**2 / m + (A2 - C + 1.25 * m * m * H**2) * gn
        bochner_lb = 0.5 * s.lap_grad_norm - lb
    else:
        bochner_lb = nan
    if C <= 0 and constant_scal:
        nonpos = s.lap_grad_norm - 2.0 * (1.25 * m * m * H**2 + A2) * gn
    else:
        nonpos = nan
    bound = prop_eps_bound(m, epsilon)
    holds = H**2 >= bound
    eps_margin = np.where(holds, s.lap_grad_norm - epsilon * gn, np.nan)
    return {
        "ric_formula_res": ric_res,
        "tangent_equation_holds": tangent_ok,
        "bochner_lb_margin": bochner_lb,
        "nonpos_lb_margin": nonpos,
        "prop_eps_bound": bound,
        "prop_eps_hypothesis": holds,
        "prop_eps_margin": eps_margin,
        "min_H_sq": float(np.min(H**2)),
    }
