"""Gaussian elimination over a finite field.

Matrices are numpy object arrays of element codes; every operation goes
through the field context, so the same code works over F_p, F_q and k_n.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.finite_field import FieldCtx


def _as_matrix(rows: Sequence[Sequence[int]]) -> np.ndarray:
    return np.array([[int(x) for x in row] for row in rows], dtype=object).reshape(
        len(rows), len(rows[0]) if len(rows) else 0
    )


def row_reduce(rows: Sequence[Sequence[int]], ctx: FieldCtx) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form and the pivot columns."""
    A = _as_matrix(rows)
    nrows, ncols = A.shape
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if A[i, c]), None)
        if pivot is None:
            continue
        if pivot != r:
            A[[r, pivot], :] = A[[pivot, r], :]
        inv = ctx.inv(A[r, c])
        A[r, :] = [ctx.mul(x, inv) for x in A[r, :]]
        for i in range(nrows):
            if i != r and A[i, c]:
                f = A[i, c]
                A[i, :] = [ctx.sub(x, ctx.mul(f, y)) for x, y in zip(A[i, :], A[r, :])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return A, pivots


def rank(rows: Sequence[Sequence[int]], ctx: FieldCtx) -> int:
    if not len(rows):
        return 0
    return len(row_reduce(rows, ctx)[1])


def solve(
    rows: Sequence[Sequence[int]], rhs: Sequence[int], ctx: FieldCtx
) -> Optional[List[int]]:
    """One solution of A x = b (free variables set to zero) or ``None``."""
    ncols = len(rows[0]) if len(rows) else 0
    augmented = [list(row) + [b] for row, b in zip(rows, rhs)]
    R, pivots = row_reduce(augmented, ctx)
    if ncols in pivots:
        return None
    x = [0] * ncols
    for r, c in enumerate(pivots):
        x[c] = int(R[r, ncols])
    return x


def random_invertible(ctx: FieldCtx, size: int, rng: np.random.Generator) -> List[List[int]]:
    """Uniform random element of GL_size over ``ctx`` by rejection."""
    while True:
        rows = [[int(v) for v in rng.integers(0, ctx.size, size=size)] for _ in range(size)]
        if rank(rows, ctx) == size:
            return rows


def nullspace(rows: Sequence[Sequence[int]], ctx: FieldCtx) -> List[List[int]]:
    """Basis of {x : A x = 0}, one vector per free column."""
    ncols = len(rows[0]) if len(rows) else 0
    R, pivots = row_reduce(rows, ctx)
    basis: List[List[int]] = []
    for free in (c for c in range(ncols) if c not in pivots):
        v = [0] * ncols
        v[free] = 1
        for r, c in enumerate(pivots):
            v[c] = ctx.neg(int(R[r, free]))
        basis.append(v)
    return basis
