"""Information capacity of pricing DC cones.

For a cone ``A = U_i (cap_j p_ij°)`` the capacity is

    I(A) = min_q  phi(q),   phi(q) = max_i  min_{p in hull(p_i1, p_i2, ...)}  D(p || q),

in bits.  ``phi`` is convex, being a maximum of partial minima of a
jointly convex function.  The inner ``min over the hull`` equals the
supremum over portfolios of the cell of the smallest divergence consistent
with them; :func:`validate_hull_reduction` checks this numerically.

Three solvers are provided:

* ``blahut_arimoto`` when every cell is a single halfspace (then ``I`` is the
  Shannon capacity of the channel whose rows are the normals);
* ``minimax``, a saddle-point method for general cells: alternate between
  the worst posterior of each cell at the current prior (an exact hull
  projection) and the Blahut-Arimoto prior for those posteriors;
* ``oracle_grid``, brute force over a fine grid of priors when ``|Y| <= 3``.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .cones import DCCone, contains_portfolio
from .errors import InputError, NumericError, SolverError
from .lp import LinearProgram, OPTIMAL, minimize_convex_over_simplices, solve_lp

LOG2E = 1.0 / np.log(2.0)
Q_FLOOR = 1e-12
MAX_ITER = 100_000
NEWTON_MAX_VERTICES = 8


@dataclass
class CapacityResult:
    value: float
    q: np.ndarray = None
    posteriors: list = field(default_factory=list)
    method: str = ""
    iterations: int = 0
    lower: float = None
    upper: float = None
    log: list = field(default_factory=list)


def entropy_bits(p):
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def binary_entropy(x):
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def kl_bits(p, q):
    """D(p || q) in bits; infinite when p charges a symbol q does not."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return np.inf
    return float(np.sum(p[mask] * np.log2(p[mask] / q[mask])))


def requirement_value(L, eps):
    """``log L - H_b(eps) - eps log(L-1)``: the capacity of the decoding requirement."""
    L = int(L)
    if L < 1:
        raise InputError("L must be at least 1")
    if not 0.0 < eps < 1.0:
        raise InputError("eps must lie strictly between 0 and 1")
    if L == 1:
        return 0.0
    return float(np.log2(L) - binary_entropy(eps) - eps * np.log2(L - 1))


def _floored(q):
    q = np.maximum(np.asarray(q, dtype=float), Q_FLOOR)
    return q / q.sum()


def hull_divergence(P, q, tol=1e-9, x0=None, full_output=False):
    """``min D(p || q)`` over the convex hull of the rows of ``P``.

    Returns ``(value, p)`` or, with ``full_output``, ``(value, p, weights, gap)``.
    """
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float)
    if P.shape[0] == 1:
        val = kl_bits(P[0], q)
        return (val, P[0], np.ones(1), 0.0) if full_output else (val, P[0])
    support = P.max(axis=0) > 0
    if np.any(q[support] <= 0):
        # Symbols outside supp(q) must be avoided entirely; restrict to rows that do.
        ok = np.all(P[:, ~(q > 0)] == 0, axis=1)
        if not np.any(ok):
            return (np.inf, P[0], np.eye(1, P.shape[0])[0], 0.0) if full_output else (np.inf, P[0])
        idx = np.flatnonzero(ok)
        out = hull_divergence(P[idx], q, tol, None, True)
        w = np.zeros(P.shape[0])
        w[idx] = out[2]
        return (out[0], out[1], w, out[3]) if full_output else out[:2]
    Ps, qs = P[:, support], q[support]
    if P.shape[0] <= NEWTON_MAX_VERTICES:
        exact = _hull_newton(Ps, qs, tol)
        if exact is not None:
            val, lam, gap = exact
            p = lam @ P
            return (val, p, lam, gap) if full_output else (val, p)

    def f(lam):
        p = lam @ Ps
        m = p > 0
        return float(np.sum(p[m] * np.log2(p[m] / qs[m])))

    def grad(lam):
        p = np.maximum(lam @ Ps, 1e-300)
        return Ps @ (np.log2(p / qs) + LOG2E)

    val, lam, gap, _ = minimize_convex_over_simplices(f, grad, [P.shape[0]], tol=tol, x0=x0, full_output=True)
    p = lam @ P
    return (val, p, lam, gap) if full_output else (val, p)


def _fw_gap(P, p, q):
    """``max_j <grad D(p), p - p_j>``: bounds ``D(p||q) - min_hull D`` from above."""
    pos = p > 0
    if np.any(P[:, ~pos] > 0):
        return np.inf
    g = np.log2(p[pos] / q[pos]) + LOG2E
    return float(np.max(g @ p[pos] - P[:, pos] @ g))


def _hull_newton(P, q, tol, iters=50):
    """Exact ``min_{hull(P)} D(. || q)`` by Newton's method on candidate faces.

    Tries affinely independent vertex subsets in order of size; a candidate
    is accepted when its Frank-Wolfe gap over all vertices is below ``tol``.
    Returns ``(value, weights, gap)`` or ``None`` if no face qualifies.
    """
    m, d = P.shape
    for size in range(1, min(m, d) + 1):
        for S in itertools.combinations(range(m), size):
            PS = P[list(S)]
            sup = PS.max(axis=0) > 0
            if size > 1 and np.linalg.matrix_rank(PS[1:] - PS[0]) < size - 1:
                continue
            mu = np.full(size, 1.0 / size)
            B = PS[1:] - PS[0]          # directions within the face
            ok = True
            for _ in range(iters):
                p = mu @ PS
                g = B[:, sup] @ (np.log2(p[sup] / q[sup]) + LOG2E)
                if size == 1 or np.max(np.abs(g)) < 1e-15:
                    break
                H = LOG2E * (B[:, sup] / p[sup]) @ B[:, sup].T
                try:
                    step = np.linalg.solve(H, -g)
                except np.linalg.LinAlgError:
                    ok = False
                    break
                full_step = np.concatenate([[-step.sum()], step])
                t = 1.0
                # stay inside the open face
                neg = full_step < 0
                if np.any(neg):
                    t = min(1.0, 0.99 * float(np.min(mu[neg] / -full_step[neg])))
                if t < 1e-12:
                    ok = False
                    break
                mu = mu + t * full_step
                if t == 1.0 and np.max(np.abs(full_step)) < 1e-14:
                    break
            if not ok:
                continue
            p = mu @ PS
            gap = _fw_gap(P, p, q)
            if gap <= tol:
                lam = np.zeros(m)
                lam[list(S)] = mu
                return kl_bits(p, q), lam, max(gap, 0.0)
    return None


def phi(A, q, tol=1e-9):
    """``max_i min_{p in hull(cell i)} D(p || q)`` with the per-cell minimizers."""
    q = np.asarray(q, dtype=float)
    best, posts = -np.inf, []
    for c in A.cells:
        if c.is_full:
            return np.inf, posts
        v, p = hull_divergence(c.normals, q, tol)
        posts.append(p)
        best = max(best, v)
    return best, posts


def _degenerate(A):
    if A.is_empty:
        return CapacityResult(-np.inf, method="empty")
    if A.has_full_cell:
        return CapacityResult(np.inf, method="full")
    return None


def blahut_arimoto(A, tol=1e-6, max_iter=MAX_ITER):
    """Shannon capacity of the channel whose rows are the (single) cell normals."""
    out = _degenerate(A)
    if out is not None:
        return out
    if any(c.normals.shape[0] != 1 for c in A.cells):
        raise InputError("blahut_arimoto needs every cell to be a single halfspace")
    P = np.array([c.normals[0] for c in A.cells])
    w, q, lower, upper, it, log = _ba_rows(P, tol / 10, max_iter)
    if upper - lower >= tol / 10:
        raise SolverError(f"Blahut-Arimoto did not converge in {max_iter} iterations")
    return CapacityResult(upper, q, list(P), "blahut_arimoto", it, lower, upper, log)


def _ba_rows(P, gap, max_iter, w=None):
    """Blahut-Arimoto iterations on the rows of ``P`` until ``upper - lower < gap``."""
    k = P.shape[0]
    w = np.full(k, 1.0 / k) if w is None else w
    log = []
    mask = P > 0
    logP = np.log2(np.where(mask, P, 1.0))
    for it in range(max_iter):
        q = w @ P
        with np.errstate(divide="ignore", invalid="ignore"):
            D = np.where(mask, P * (logP - np.log2(q)), 0.0).sum(axis=1)
        lower = float(w @ D)
        upper = float(D.max())
        if it % 50 == 0:
            log.append((it, lower, upper))
        if upper - lower < gap:
            break
        if not np.isfinite(upper):
            raise NumericError("Blahut-Arimoto prior lost the support of a row")
        w = w * np.exp2(D - upper)
        w /= w.sum()
    return w, q, lower, upper, it, log


def _cell_posteriors(A, q, tol):
    """Per-cell worst posteriors ``p_i*(q)`` and values ``g_i(q) = D(p_i*(q) || q)``."""
    out = [hull_divergence(c.normals, q, tol) for c in A.cells]
    return np.array([v for v, _ in out]), np.array([p for _, p in out])


def _weighted_lower_bound(w, g, Pstar, q):
    """Certified lower bound on ``I`` from cell weights ``w`` at prior ``q``.

    ``h(q) = sum_i w_i g_i(q)`` is convex with gradient ``-log2(e) sum_i w_i p_i*/q``,
    and ``I >= min_q h``; subtracting the Frank-Wolfe gap of ``h`` at ``q`` bounds it.
    """
    keep = w > 0
    h = float(w[keep] @ g[keep])
    m = w @ Pstar
    gap = LOG2E * (float(np.max(m / q)) - 1.0)
    return h - max(gap, 0.0)


def minimax(A, tol=1e-6, max_iter=MAX_ITER):
    """Saddle-point solver for general cells, iterating on the prior ``q``.

    Each round computes the worst posterior of every cell at ``q`` and moves
    ``q`` to the Blahut-Arimoto optimal output distribution for those
    posteriors.  ``phi`` never increases along the way (each cell value is at
    most the divergence from its old posterior) and the saddle point is a
    fixed point.  ``phi(q)`` is a certified upper bound and the BA weights
    give a certified lower bound; iteration stops when they meet within ``tol``.
    """
    out = _degenerate(A)
    if out is not None:
        return out
    k, d = len(A.cells), A.dim
    inner_tol = tol / 10
    q = np.full(d, 1.0 / d)
    w = np.full(k, 1.0 / k)
    best_lower, best_upper, best_q, best_posts = -np.inf, np.inf, None, None
    log = []
    for it in range(max_iter):
        g, Pstar = _cell_posteriors(A, q, inner_tol)
        upper = float(g.max())
        if upper < best_upper:
            best_upper, best_q, best_posts = upper, q, list(Pstar)
        if it > 0:
            best_lower = max(best_lower, _weighted_lower_bound(w, g, Pstar, q))
        if it % 10 == 0:
            log.append((it, best_lower, best_upper))
        if best_upper - best_lower <= tol:
            return CapacityResult(max(best_upper, 0.0), best_q, best_posts, "minimax", it,
                                  best_lower, best_upper, log)
        w, q_next, _, _, _, _ = _ba_rows(Pstar, inner_tol, 10_000, w)
        q = _floored(q_next)
    raise SolverError(f"minimax capacity solver did not converge in {max_iter} iterations "
                      f"(bounds {best_lower:.9g}, {best_upper:.9g})")


def _segment_min(P1, P2, Q, iters=60):
    """min over t in [0,1] of D((1-t)p1 + t p2 || q), vectorized over rows of Q."""
    def D(t):
        p = (1 - t)[:, None] * P1 + t[:, None] * P2
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(p > 0, p * np.log2(p / Q), 0.0)
        return terms.sum(axis=1)

    n = Q.shape[0]
    lo, hi = np.zeros(n), np.ones(n)
    ratio = (np.sqrt(5) - 1) / 2
    for _ in range(iters):
        a = hi - ratio * (hi - lo)
        b = lo + ratio * (hi - lo)
        fa, fb = D(a), D(b)
        left = fa <= fb
        hi = np.where(left, b, hi)
        lo = np.where(left, lo, a)
    return np.minimum(np.minimum(D(lo), D(hi)), np.minimum(D(np.zeros(n)), D(np.ones(n))))


def _cell_values(P, Q):
    """Exact-up-to-line-search ``min_{hull(P)} D(. || q)`` for each row q of Q (|Y| <= 3)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.full(Q.shape[0], np.inf)
        for p in P:
            terms = np.where(p > 0, p * np.log2(p / Q), 0.0)
            vals = np.minimum(vals, terms.sum(axis=1))
    m = P.shape[0]
    for i in range(m):
        for j in range(i + 1, m):
            vals = np.minimum(vals, _segment_min(np.broadcast_to(P[i], Q.shape),
                                                 np.broadcast_to(P[j], Q.shape), Q))
    if P.shape[1] == 3:
        for i in range(m):
            for j in range(i + 1, m):
                for k in range(j + 1, m):
                    M = np.array([P[i], P[j], P[k]]).T
                    if abs(np.linalg.det(M)) < 1e-12:
                        continue
                    bary = np.linalg.solve(M, Q.T).T
                    inside = np.all(bary >= -1e-12, axis=1)
                    vals[inside] = 0.0
    return vals


def _simplex_grid(d, step, center=None, radius=None):
    n = int(round(1 / step)) if center is None else int(round(2 * radius / step))
    if center is None:
        if d == 2:
            t = np.arange(n + 1) / n
            return np.column_stack([t, 1 - t])
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        keep = i + j <= n
        i, j = i[keep], j[keep]
        return np.column_stack([i, j, n - i - j]) / n
    offs = (np.arange(n + 1) - n / 2) * step
    if d == 2:
        pts = center + np.column_stack([offs, -offs])
    else:
        u, v = np.meshgrid(offs, offs, indexing="ij")
        u, v = u.ravel(), v.ravel()
        pts = center + np.column_stack([u, v, -u - v])
    return pts[np.all(pts >= 0, axis=1)]


def oracle_grid(A, step=0.002, refine=2):
    """Brute-force ``min_q phi(q)`` on a simplex grid (``|Y| <= 3``), then local refinement."""
    out = _degenerate(A)
    if out is not None:
        return out
    d = A.dim
    if d > 3:
        raise InputError("oracle_grid supports alphabets of at most 3 symbols")
    if d == 1:
        return CapacityResult(0.0, np.ones(1), [], "oracle_grid")
    Q = _simplex_grid(d, step)
    best_val, best_q = np.inf, None
    h = step
    for level in range(refine + 1):
        vals = np.max([_cell_values(c.normals, Q) for c in A.cells], axis=0)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_q = float(vals[i]), Q[i]
        if level < refine:
            Q = _simplex_grid(d, h / 20, best_q, 3 * h)
            h = h / 20
    return CapacityResult(best_val, best_q, [], "oracle_grid", refine)


def info_capacity(A, method="auto", tol=1e-6):
    """Information capacity ``I(A)`` in bits.

    ``I(empty) = -inf`` and ``I`` of a cone with a full cell is ``+inf``.
    """
    if not isinstance(A, DCCone):
        raise InputError("info_capacity expects a DCCone")
    if method == "auto":
        single = all(c.normals.shape[0] == 1 for c in A.cells)
        method = "blahut_arimoto" if single else "minimax"
    if method == "blahut_arimoto":
        return blahut_arimoto(A, tol)
    if method == "minimax":
        return minimax(A, tol)
    if method == "oracle_grid":
        return oracle_grid(A)
    raise InputError(f"unknown capacity method {method!r}")


# ---------------------------------------------------------------------------
# Numerical check of the hull reduction


def tilted_divergence(a, q):
    """``inf { D(p || q) : <p, a> <= 0 }`` by exponential tilting of ``q``."""
    a = np.asarray(a, dtype=float)
    q = np.asarray(q, dtype=float)
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    # Round-off from LP vertices should not turn a zero payoff positive.
    a = np.where(np.abs(a) <= 1e-12 * max(scale, 1.0), 0.0, a)
    if float(q @ a) <= 0:
        return 0.0
    if np.all(a > 0):
        return np.inf
    neg = a <= 0
    if not np.any(a < 0):
        # Only the zero set is admissible: condition q on it.
        return float(-np.log2(q[neg].sum()))

    def tilt(theta):
        z = -theta * a
        w = q * np.exp2(z - z.max())
        return w / w.sum()

    lo, hi = 0.0, 1.0
    while float(tilt(hi) @ a) > 0:
        hi *= 2
        if hi > 1e6:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if float(tilt(mid) @ a) > 0:
            lo = mid
        else:
            hi = mid
    return kl_bits(tilt(hi), q)


def attaining_portfolio(p_star, q, floor=1e-12):
    """Portfolio ``a = D(p*||q) - log(p*/q)`` attaining the hull value (clipped where p* vanishes)."""
    p = np.maximum(np.asarray(p_star, dtype=float), floor)
    q = np.asarray(q, dtype=float)
    D = float(np.sum(p_star[p_star > 0] * np.log2(p_star[p_star > 0] / q[p_star > 0])))
    return D - np.log2(p / q)


def validate_hull_reduction(A, q=None, samples=20, seed=0, tol=1e-6):
    """Check the hull reduction of the inner sup/inf at prior ``q`` (default uniform).

    Two checks per cell: random portfolios of the cell (vertices of the cell
    cut by a box, found with random-objective LPs) never beat the hull value,
    and the portfolio built from the hull minimizer attains it.  Returns the
    worst violation of each check as ``(excess, attainment_error)``.
    """
    rng = np.random.default_rng(seed)
    d = A.dim
    q = np.full(d, 1.0 / d) if q is None else np.asarray(q, dtype=float)
    excess, attain = 0.0, 0.0
    for c in A.cells:
        if c.is_full:
            continue
        hull_val, p_star = hull_divergence(c.normals, q, tol=1e-10)
        for _ in range(samples):
            obj = rng.normal(size=d)
            cons = [(p, "<=", 0.0) for p in c.normals]
            res = solve_lp(LinearProgram(obj, cons, [(-1.0, 1.0)] * d, "max"))
            if res.status != OPTIMAL:
                continue
            excess = max(excess, tilted_divergence(res.x, q) - hull_val)
        a_star = attaining_portfolio(p_star, q)
        if contains_portfolio(DCCone(A.alphabet, [c]), a_star, tol=1e-6):
            attain = max(attain, abs(tilted_divergence(a_star, q) - hull_val))
        else:
            attain = np.inf
    return excess, attain
