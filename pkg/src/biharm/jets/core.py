"""Truncated multivariate Taylor series ("jets") with batched coefficients.

A :class:`Jet` holds the Taylor coefficients ``d^alpha f / alpha!`` of one
or many scalar functions at a base point. The trailing axis of
``Jet.coeffs`` indexes multi-indices; leading axes are an arbitrary batch
shape, so a whole matrix of jets over many sample points is one object and
arithmetic broadcasts over the batch like numpy.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from . import backend
from ._space import JetSpace, jet_space


class JetError(ValueError):
    """Incompatible jets or an invalid jet operation."""


class JetDomainError(JetError):
    """Elementary function applied outside its domain (e.g. 1/0, sqrt(-1))."""


def _as_jet_operand(x, space):
    if isinstance(x, Jet):
        if x.space is not space:
            raise JetError(f"jet mismatch: {x.space} vs {space}")
        return x
    return np.asarray(x, dtype=float)


def _kernel_mul(a: np.ndarray, b: np.ndarray, space: JetSpace) -> np.ndarray:
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
    n = space.size
    aa = np.ascontiguousarray(np.broadcast_to(a, shape + (n,))).reshape(-1, n)
    bb = np.ascontiguousarray(np.broadcast_to(b, shape + (n,))).reshape(-1, n)
    out = backend.kernels().mul(aa, bb, space.mul_a, space.mul_b, space.mul_starts)
    return np.asarray(out).reshape(shape + (n,))


class Jet:
    __slots__ = ("space", "coeffs")
    __array_priority__ = 100  # make ndarray * Jet defer to Jet.__rmul__

    def __init__(self, coeffs, space: JetSpace):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[-1:] != (space.size,):
            raise JetError(
                f"coefficient axis has length {coeffs.shape[-1:]}, expected {space.size}"
            )
        self.space = space
        self.coeffs = coeffs

    # -- construction -------------------------------------------------------
    @classmethod
    def constant(cls, value, num_vars: int, order: int) -> "Jet":
        space = jet_space(num_vars, order)
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (space.size,))
        c[..., 0] = value
        return cls(c, space)

    @classmethod
    def zeros(cls, shape, num_vars: int, order: int) -> "Jet":
        space = jet_space(num_vars, order)
        return cls(np.zeros(tuple(shape) + (space.size,)), space)

    # -- basic properties ---------------------------------------------------
    @property
    def num_vars(self) -> int:
        return self.space.num_vars

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def value(self) -> np.ndarray:
        """Constant term (function value at the base point)."""
        return self.coeffs[..., 0]

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, num_vars={self.num_vars}, order={self.order})"

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.coeffs[key + (slice(None),)], self.space)

    def __len__(self) -> int:
        return self.shape[0]

    # -- arithmetic ---------------------------------------------------------
    def _with_constant_added(self, x: np.ndarray) -> "Jet":
        shape = np.broadcast_shapes(self.shape, x.shape)
        c = np.array(np.broadcast_to(self.coeffs, shape + (self.space.size,)))
        c[..., 0] += x
        return Jet(c, self.space)

    def __add__(self, other):
        other = _as_jet_operand(other, self.space)
        if isinstance(other, Jet):
            return Jet(self.coeffs + other.coeffs, self.space)
        return self._with_constant_added(other)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.space)

    def __sub__(self, other):
        other = _as_jet_operand(other, self.space)
        if isinstance(other, Jet):
            return Jet(self.coeffs - other.coeffs, self.space)
        return self._with_constant_added(-other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        other = _as_jet_operand(other, self.space)
        if isinstance(other, Jet):
            return Jet(_kernel_mul(self.coeffs, other.coeffs, self.space), self.space)
        return Jet(self.coeffs * other[..., None], self.space)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_jet_operand(other, self.space)
        if isinstance(other, Jet):
            return self * reciprocal(other)
        if np.any(other == 0):
            raise JetDomainError("division by zero")
        return Jet(self.coeffs / other[..., None], self.space)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = Jet.constant(np.ones(self.shape), self.num_vars, self.order)
            base = self
            while p:
                if p & 1:
                    out = out * base
                p >>= 1
                if p:
                    base = base * base
            return out
        return power(self, p)

    # -- calculus -----------------------------------------------------------
    def diff(self, i: int) -> "Jet":
        """Partial derivative in variable ``i``; the result has order - 1."""
        if not 0 <= i < self.num_vars:
            raise JetError(f"variable index {i} out of range")
        src, fac = self.space.derivative_tables[i]
        lower = jet_space(self.num_vars, self.order - 1)
        return Jet(self.coeffs[..., src] * fac, lower)

    def gradient(self) -> "Jet":
        """Stack of all first partials along a new trailing batch axis."""
        return stack([self.diff(i) for i in range(self.num_vars)], axis=-1)

    def truncate(self, order: int) -> "Jet":
        if order > self.order or order < 0:
            raise JetError(f"cannot truncate order {self.order} jet to {order}")
        sp = jet_space(self.num_vars, order)
        return Jet(self.coeffs[..., : sp.size], sp)

    def derivative(self, alpha: Sequence[int]) -> np.ndarray:
        return extract_derivative(self, alpha)

    # -- reductions and reshaping --------------------------------------------
    def sum(self, axis=None) -> "Jet":
        nb = len(self.shape)
        if axis is None:
            axis = tuple(range(nb))
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        axes = tuple(a % nb for a in axes)
        return Jet(self.coeffs.sum(axis=axes), self.space)

    def swapaxes(self, a: int, b: int) -> "Jet":
        nb = len(self.shape)
        return Jet(np.swapaxes(self.coeffs, a % nb, b % nb), self.space)

    def expand(self, axis: int) -> "Jet":
        nb = len(self.shape)
        ax = axis if axis >= 0 else nb + 1 + axis
        return Jet(np.expand_dims(self.coeffs, ax), self.space)


def stack(jets: Iterable[Jet], axis: int = 0) -> Jet:
    jets = list(jets)
    space = jets[0].space
    for j in jets:
        if j.space is not space:
            raise JetError("cannot stack jets from different spaces")
    nb = len(jets[0].shape) + 1
    return Jet(np.stack([j.coeffs for j in jets], axis=axis % nb), space)


# -- variables ----------------------------------------------------------------

def seed_variable(i: int, value, num_vars: int, order: int) -> Jet:
    """Jet of the coordinate function ``x_i`` at a base point."""
    if not 0 <= i < num_vars:
        raise JetError(f"variable index {i} out of range for {num_vars} variables")
    j = Jet.constant(value, num_vars, order)
    if order >= 1:
        j.coeffs[..., 1 + i] = 1.0
    return j


def seed(points, order: int) -> Jet:
    """Coordinate jets for a batch of base points.

    ``points`` has shape ``(..., m)``; the result has the same batch shape
    and ``result[..., i]`` is the jet of ``x_i``.
    """
    points = np.asarray(points, dtype=float)
    m = points.shape[-1]
    j = Jet.constant(points, m, order)
    if order >= 1:
        idx = np.arange(m)
        j.coeffs[..., idx, 1 + idx] = 1.0
    return j


def extract_derivative(j: Jet, alpha: Sequence[int]) -> np.ndarray:
    """Return ``d^alpha f`` at the base point (``alpha! * coeff``)."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != j.num_vars or min(alpha, default=0) < 0:
        raise JetError(f"bad multi-index {alpha} for {j.num_vars} variables")
    if sum(alpha) > j.order:
        raise JetError(f"|alpha| = {sum(alpha)} exceeds jet order {j.order}")
    r = j.space.rank[alpha]
    return j.coeffs[..., r] * j.space.factorials[r]


# -- elementary functions --------------------------------------------------------

def _compose(x: Jet, coefs: np.ndarray) -> Jet:
    """Compose ``x`` with a univariate series whose Taylor coefficients at
    ``x.value`` are ``coefs[..., k]`` for k = 0..order."""
    sp = x.space
    n = sp.size
    shape = x.shape
    d = np.array(x.coeffs.reshape(-1, n))
    d[:, 0] = 0.0
    cf = np.ascontiguousarray(np.broadcast_to(coefs, shape + (sp.order + 1,))).reshape(
        -1, sp.order + 1
    )
    out = backend.kernels().compose(d, cf, sp.mul_a, sp.mul_b, sp.mul_starts)
    return Jet(np.asarray(out).reshape(shape + (n,)), sp)


def _ks(x: Jet) -> np.ndarray:
    return np.arange(x.order + 1)


def exp(x: Jet) -> Jet:
    k = _ks(x)
    fact = np.array([math.factorial(i) for i in k], dtype=float)
    return _compose(x, np.exp(x.value)[..., None] / fact)


def log(x: Jet) -> Jet:
    a = x.value
    if np.any(a <= 0):
        raise JetDomainError("log of a jet with non-positive constant term")
    k = _ks(x)
    kk = np.maximum(k, 1)
    coefs = (-1.0) ** (k + 1) / kk / a[..., None] ** kk
    coefs[..., 0] = np.log(a)
    return _compose(x, coefs)


def _sincos_coefs(a: np.ndarray, order: int, shift: int) -> np.ndarray:
    # k-th derivative of sin cycles through sin, cos, -sin, -cos
    s, c = np.sin(a), np.cos(a)
    cycle = (s, c, -s, -c)
    return np.stack(
        [cycle[(k + shift) % 4] / math.factorial(k) for k in range(order + 1)], axis=-1
    )


def sin(x: Jet) -> Jet:
    return _compose(x, _sincos_coefs(x.value, x.order, 0))


def cos(x: Jet) -> Jet:
    return _compose(x, _sincos_coefs(x.value, x.order, 1))


def reciprocal(x: Jet) -> Jet:
    a = x.value
    if np.any(a == 0):
        raise JetDomainError("division by a jet with zero constant term")
    k = _ks(x)
    return _compose(x, (-1.0) ** k / a[..., None] ** (k + 1))


def power(x: Jet, p: float) -> Jet:
    """``x ** p`` for real ``p``; non-integer ``p`` needs a positive base."""
    a = x.value
    p = float(p)
    integral = p.is_integer()
    if not integral and np.any(a <= 0):
        raise JetDomainError(f"x**{p} of a jet with non-positive constant term")
    if integral and p < 0 and np.any(a == 0):
        raise JetDomainError("negative power of a jet with zero constant term")
    k = _ks(x)
    gbin = np.cumprod(np.concatenate([[1.0], (p - k[:-1]) / (k[:-1] + 1.0)]))
    with np.errstate(divide="ignore", invalid="ignore"):
        coefs = gbin * a[..., None] ** (p - k)
    # a**(p-k) blows up at a == 0 only where the binomial factor vanishes
    coefs = np.where(gbin == 0, 0.0, coefs)
    return _compose(x, coefs)


def sqrt(x: Jet) -> Jet:
    if np.any(x.value <= 0):
        raise JetDomainError("sqrt of a jet with non-positive constant term")
    return power(x, 0.5)


_UNARY = {
    "sqrt": sqrt,
    "sin": sin,
    "cos": cos,
    "exp": exp,
    "log": log,
    "neg": lambda a: -a,
}
_BINARY = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "pow": lambda a, p: power(a, p),
}


def lift_arithmetic(op: str, *args):
    """Apply a named elementary operation to jets."""
    if op in _UNARY:
        if len(args) != 1:
            raise JetError(f"{op} takes one argument")
        return _UNARY[op](args[0])
    if op in _BINARY:
        if len(args) != 2:
            raise JetError(f"{op} takes two arguments")
        return _BINARY[op](*args)
    raise JetError(f"unknown operation {op!r}")


# -- tensor helpers ---------------------------------------------------------------

def _parse(subscripts: str):
    lhs, out = subscripts.replace(" ", "").split("->")
    ins = lhs.split(",")
    for s in ins:
        if len(set(s)) != len(s):
            raise JetError(f"repeated index within operand {s!r} unsupported")
    return ins, out


def _align(x: np.ndarray, subs: str, letters: str) -> np.ndarray:
    # x has axes subs + trailing coefficient axis; reorder to `letters`
    perm = [subs.index(l) for l in letters if l in subs]
    y = np.transpose(x, perm + [len(subs)])
    shape = []
    it = iter(y.shape[:-1])
    for l in letters:
        shape.append(next(it) if l in subs else 1)
    return y.reshape(shape + [y.shape[-1]])


def _pair(s1, x1, s2, x2, keep: str):
    letters = "".join(dict.fromkeys(s1 + s2))
    out = "".join(l for l in letters if l in keep)
    if isinstance(x1, Jet) and isinstance(x2, Jet):
        if x1.space is not x2.space:
            raise JetError("jet mismatch in contraction")
        a = _align(x1.coeffs, s1, letters)
        b = _align(x2.coeffs, s2, letters)
        prod = _kernel_mul(a, b, x1.space)
        drop = tuple(i for i, l in enumerate(letters) if l not in keep)
        if drop:
            prod = prod.sum(axis=drop)
        return out, Jet(prod, x1.space)
    if isinstance(x1, Jet) or isinstance(x2, Jet):
        jet, arr = (x1, x2) if isinstance(x1, Jet) else (x2, x1)
        sj, sa = (s1, s2) if isinstance(x1, Jet) else (s2, s1)
        c = np.einsum(f"{sj}Z,{sa}->{out}Z", jet.coeffs, np.asarray(arr, dtype=float))
        return out, Jet(c, jet.space)
    return out, np.einsum(f"{s1},{s2}->{out}", x1, x2)


def einsum(subscripts: str, *operands):
    """Einstein summation over jets (and plain arrays), pairwise left to right.

    Index letters must not repeat inside an operand; ``Z`` is reserved.
    """
    ins, out = _parse(subscripts)
    if len(ins) != len(operands):
        raise JetError("operand count does not match subscripts")
    cur_s, cur = ins[0], operands[0]
    for k in range(1, len(ins)):
        later = "".join(ins[k + 1 :]) + out
        keep = "".join(l for l in dict.fromkeys(cur_s + ins[k]) if l in later)
        cur_s, cur = _pair(cur_s, cur, ins[k], operands[k], keep)
    if cur_s != out:
        if isinstance(cur, Jet):
            if set(cur_s) != set(out):
                drop = tuple(i for i, l in enumerate(cur_s) if l not in out)
                cur = cur.sum(axis=drop)
                cur_s = "".join(l for l in cur_s if l in out)
            perm = [cur_s.index(l) for l in out]
            cur = Jet(np.transpose(cur.coeffs, perm + [len(out)]), cur.space)
        else:
            cur = np.einsum(f"{cur_s}->{out}", cur)
    return cur


def inv(mat: Jet) -> Jet:
    """Inverse of a batch of square jet matrices (batch shape ``(..., k, k)``).

    Uses the terminating Neumann series around the constant part, which is
    exact through the truncation order.
    """
    m0 = mat.value
    cond = np.linalg.cond(m0)
    if np.any(~np.isfinite(cond)) or np.any(cond > 1e12):
        raise JetDomainError("singular matrix jet")
    m0_inv = np.linalg.inv(m0)
    nil = Jet(np.array(mat.coeffs), mat.space)
    nil.coeffs[..., 0] = 0.0
    # X <- M0^-1 - M0^-1 N X ; each sweep fixes one more degree
    letters = "".join(chr(ord("A") + i) for i in range(len(mat.shape) - 2))
    sub_mn = f"{letters}ij,{letters}jk->{letters}ik"
    corr = einsum(sub_mn, m0_inv, nil)  # M0^-1 N
    x = Jet.constant(m0_inv, mat.num_vars, mat.order)
    for _ in range(mat.order):
        x = Jet.constant(m0_inv, mat.num_vars, mat.order) - einsum(sub_mn, corr, x)
    return x


def compose_polynomial(outer: Jet, inner: Jet) -> Jet:
    """Substitute a jet (polynomial) in ``n`` variables at ``inner``.

    ``outer`` has batch shape ``(*B, *T)`` in ``n`` variables; ``inner`` has
    batch shape ``(*B, n)`` with zero constant terms (displacements from the
    outer base point). Returns a jet in inner's variables with batch shape
    ``(*B, *T)``, exact through inner's order.
    """
    n = outer.num_vars
    if inner.shape[-1] != n:
        raise JetError("inner jet count must equal the outer variable count")
    if np.any(inner.value != 0):
        raise JetError("inner jets must have zero constant term")
    bshape = inner.shape[:-1]
    nb = len(bshape)
    if outer.shape[:nb] != bshape:
        raise JetError("outer and inner batch shapes disagree")
    osp = outer.space
    deg = min(osp.order, inner.order)
    plan = osp.monomial_plan(deg)
    nmono = osp.size_at(deg)
    isp = inner.space
    mono = np.zeros(bshape + (nmono, isp.size))
    mono[..., 0, 0] = 1.0
    for r, parent, var in plan:
        mono[..., r, :] = _kernel_mul(mono[..., parent, :], inner.coeffs[..., var, :], isp)
    tshape = outer.shape[nb:]
    oc = outer.coeffs[..., :nmono].reshape(bshape + (-1, nmono))
    res = np.einsum("...tb,...bk->...tk", oc, mono)
    return Jet(res.reshape(bshape + tshape + (isp.size,)), isp)
