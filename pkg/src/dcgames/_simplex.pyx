# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simplex pivot loop.  Same contract as ``_simplex_py.run_simplex``."""

cdef int OPTIMAL = 0
cdef int UNBOUNDED = 1
cdef int ITERATION_CAP = 2


def run_simplex(double[:, ::1] T, Py_ssize_t[::1] basis, Py_ssize_t n_enter,
                Py_ssize_t max_iter, double tol):
    cdef Py_ssize_t m = T.shape[0] - 1
    cdef Py_ssize_t rhs = T.shape[1] - 1
    cdef Py_ssize_t ncol = T.shape[1]
    cdef Py_ssize_t iterations = 0
    cdef Py_ssize_t i, j, k, r
    cdef double a, ratio, best, piv, f, v

    while True:
        j = -1
        for k in range(n_enter):
            if T[m, k] < -tol:
                j = k
                break
        if j < 0:
            return OPTIMAL, iterations
        if iterations >= max_iter:
            return ITERATION_CAP, iterations

        r = -1
        best = 0.0
        for i in range(m):
            a = T[i, j]
            if a > tol:
                v = T[i, rhs]
                if v < 0.0:
                    v = 0.0
                ratio = v / a
                if r < 0 or ratio < best or (ratio == best and basis[i] < basis[r]):
                    r = i
                    best = ratio
        if r < 0:
            return UNBOUNDED, iterations

        piv = T[r, j]
        for k in range(ncol):
            T[r, k] = T[r, k] / piv
        for i in range(m + 1):
            if i == r:
                continue
            f = T[i, j]
            if f != 0.0:
                for k in range(ncol):
                    T[i, k] = T[i, k] - f * T[r, k]
        for i in range(m + 1):
            T[i, j] = 0.0
        T[r, j] = 1.0
        basis[r] = j
        iterations += 1
