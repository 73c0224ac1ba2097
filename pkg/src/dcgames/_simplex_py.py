"""Pure-Python simplex pivot loop; the fallback for the compiled ``_simplex``.

Both implementations share one contract so that ``lp.solve_lp`` can use
either interchangeably:

``run_simplex(T, basis, n_enter, max_iter, tol) -> (status, iterations)``

``T`` is a C-contiguous float64 tableau of shape ``(m + 1, N + 1)``: rows
``0..m-1`` are constraints, row ``m`` holds reduced costs of a minimization,
the last column is the right-hand side.  ``basis[i]`` is the basic column of
row ``i``.  Only columns ``< n_enter`` may enter.  Bland's rule is used for
both the entering column and ratio-test ties, so the pivot sequence is fully
determined by the input.  Status: 0 optimal, 1 unbounded, 2 iteration cap.
"""

import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_CAP = 2


def run_simplex(T, basis, n_enter, max_iter, tol):
    m = T.shape[0] - 1
    rhs = T.shape[1] - 1
    iterations = 0
    while True:
        reduced = T[m, :n_enter]
        candidates = np.flatnonzero(reduced < -tol)
        if candidates.size == 0:
            return OPTIMAL, iterations
        if iterations >= max_iter:
            return ITERATION_CAP, iterations
        j = int(candidates[0])

        r = -1
        best = 0.0
        for i in range(m):
            a = T[i, j]
            if a > tol:
                ratio = max(T[i, rhs], 0.0) / a
                if r < 0 or ratio < best or (ratio == best and basis[i] < basis[r]):
                    r = i
                    best = ratio
        if r < 0:
            return UNBOUNDED, iterations

        pivot(T, r, j)
        basis[r] = j
        iterations += 1


def pivot(T, r, j):
    """Pivot the tableau on entry ``(r, j)`` in place."""
    T[r, :] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    rows = np.flatnonzero(col)
    if rows.size:
        T[rows, :] -= np.outer(col[rows], T[r, :])
    T[:, j] = 0.0
    T[r, j] = 1.0
