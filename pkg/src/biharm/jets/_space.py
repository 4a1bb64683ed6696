"""Multi-index bookkeeping for dense truncated Taylor series.

Coefficients are stored in graded-lexicographic order: by total degree
first, then lexicographically descending within a degree, so that
``(1, 0)`` precedes ``(0, 1)``. Because of the grading, truncation to a
lower order is a prefix slice.
"""
from __future__ import annotations

import functools
import math
from itertools import combinations_with_replacement

import numpy as np


def _multi_indices(num_vars: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    # combinations_with_replacement yields variable tuples in lex order,
    # which maps to descending exponent tuples.
    for combo in combinations_with_replacement(range(num_vars), degree):
        alpha = [0] * num_vars
        for v in combo:
            alpha[v] += 1
        out.append(tuple(alpha))
    return out


class JetSpace:
    """Index tables for jets in ``num_vars`` variables truncated at ``order``.

    Instances are cached per ``(num_vars, order)``; use :func:`jet_space`.
    """

    def __init__(self, num_vars: int, order: int):
        if num_vars < 1:
            raise ValueError("num_vars must be positive")
        if order < 0:
            raise ValueError("order must be non-negative")
        self.num_vars = num_vars
        self.order = order
        self.indices: list[tuple[int, ...]] = []
        self.degree_starts = [0]
        for d in range(order + 1):
            self.indices.extend(_multi_indices(num_vars, d))
            self.degree_starts.append(len(self.indices))
        self.size = len(self.indices)
        self.rank = {alpha: r for r, alpha in enumerate(self.indices)}
        self.degrees = np.array([sum(a) for a in self.indices], dtype=np.int64)
        self.factorials = np.array(
            [math.prod(math.factorial(k) for k in a) for a in self.indices], dtype=float
        )
        self._build_product_table()

    def _build_product_table(self) -> None:
        # pairs (alpha, beta) with alpha + beta = gamma, grouped by gamma rank;
        # the per-gamma pair order depends only on gamma, not on self.order.
        ia, ib, starts = [], [], [0]
        for gamma in self.indices:
            for ra, alpha in enumerate(self.indices):
                if sum(alpha) > sum(gamma):
                    break
                beta = tuple(g - a for g, a in zip(gamma, alpha))
                if min(beta) < 0:
                    continue
                ia.append(ra)
                ib.append(self.rank[beta])
            starts.append(len(ia))
        self.mul_a = np.array(ia, dtype=np.intp)
        self.mul_b = np.array(ib, dtype=np.intp)
        self.mul_starts = np.array(starts, dtype=np.intp)

    def __repr__(self) -> str:
        return f"JetSpace(num_vars={self.num_vars}, order={self.order})"

    def size_at(self, order: int) -> int:
        return self.degree_starts[order + 1]

    @functools.cached_property
    def derivative_tables(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per variable: (source ranks in this space, factors) for the
        coefficients of the partial derivative, laid out in order-1 space."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        lower = jet_space(self.num_vars, self.order - 1)
        tables = []
        for i in range(self.num_vars):
            src, fac = [], []
            for alpha in lower.indices:
                up = list(alpha)
                up[i] += 1
                src.append(self.rank[tuple(up)])
                fac.append(float(up[i]))
            tables.append((np.array(src, dtype=np.intp), np.array(fac)))
        return tables

    def monomial_plan(self, max_degree: int) -> list[tuple[int, int, int]]:
        """Recipe for building all monomials up to ``max_degree``.

        Each entry ``(rank, parent_rank, var)`` says monomial ``rank`` equals
        monomial ``parent_rank`` times variable ``var``; rank 0 is the unit.
        """
        plan = []
        for r in range(1, self.size_at(min(max_degree, self.order))):
            alpha = self.indices[r]
            var = next(k for k, e in enumerate(alpha) if e)
            parent = list(alpha)
            parent[var] -= 1
            plan.append((r, self.rank[tuple(parent)], var))
        return plan


@functools.lru_cache(maxsize=None)
def jet_space(num_vars: int, order: int) -> JetSpace:
    return JetSpace(num_vars, order)
