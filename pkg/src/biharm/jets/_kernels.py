"""Pure numpy implementations of the series kernels.

Used when the compiled ``_jetcore`` extension is unavailable or when
``BIHARM_PURE_PYTHON=1`` is set. Both back ends take 2-D C-contiguous
float64 arrays of shape ``(rows, size)``.
"""
from __future__ import annotations

import numpy as np

# rows * pairs above this are processed in chunks to bound the temporary
_CHUNK_ELEMS = 1 << 22


def mul(a: np.ndarray, b: np.ndarray, mul_a, mul_b, mul_starts) -> np.ndarray:
    rows = a.shape[0]
    npairs = len(mul_a)
    out = np.empty_like(a)
    step = max(1, _CHUNK_ELEMS // max(npairs, 1))
    seg = mul_starts[:-1]
    for lo in range(0, rows, step):
        hi = min(rows, lo + step)
        prod = a[lo:hi, mul_a] * b[lo:hi, mul_b]
        out[lo:hi] = np.add.reduceat(prod, seg, axis=1)
    return out


def compose(d: np.ndarray, coefs: np.ndarray, mul_a, mul_b, mul_starts) -> np.ndarray:
    """Evaluate ``sum_k coefs[:, k] * d**k`` by Horner's rule.

    ``d`` must have a zero constant term, so terms past the truncation
    order vanish and ``coefs`` needs ``order + 1`` columns.
    """
    order = coefs.shape[1] - 1
    r = np.zeros_like(d)
    r[:, 0] = coefs[:, order]
    for k in range(order - 1, -1, -1):
        r = mul(r, d, mul_a, mul_b, mul_starts)
        r[:, 0] += coefs[:, k]
    return r
