"""Dense linear programming and convex minimization over products of simplices.

The LP solver is a two-phase tableau simplex with Bland's rule.  It is meant
for the many tiny, dense programs that cone containment and informativeness
tests generate, so it favours determinism over speed: identical input always
produces the identical pivot sequence.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._simplex_py import pivot
from .errors import InputError, NumericError, SolverError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_RELATIONS = ("<=", ">=", "==")
_REL_ALIASES = {"<=": "<=", "≤": "<=", "le": "<=", ">=": ">=", "≥": ">=",
                "ge": ">=", "==": "==", "=": "==", "eq": "=="}


@dataclass
class LinearProgram:
    """``sense`` ``objective @ x`` subject to ``constraints`` and ``bounds``.

    Each constraint is a triple ``(coefficients, relation, rhs)`` with relation
    one of ``"<="``, ``">="``, ``"=="``.  ``bounds`` is either ``None`` (all
    variables free) or one ``(lo, hi)`` pair per variable, where either side
    may be ``None`` for "unbounded on that side".
    """

    objective: np.ndarray
    constraints: list = field(default_factory=list)
    bounds: list = None
    sense: str = "max"

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        n = self.objective.size
        if n == 0:
            raise InputError("an LP needs at least one variable")
        if not np.all(np.isfinite(self.objective)):
            raise InputError("objective must be finite")
        if self.sense not in ("max", "min"):
            raise InputError(f"sense must be 'max' or 'min', got {self.sense!r}")
        rows = []
        for entry in self.constraints:
            try:
                coeffs, rel, rhs = entry
            except (TypeError, ValueError):
                raise InputError("constraints must be (coefficients, relation, rhs) triples")
            coeffs = np.asarray(coeffs, dtype=float).ravel()
            if coeffs.size != n:
                raise InputError(f"constraint has {coeffs.size} coefficients, expected {n}")
            if rel not in _REL_ALIASES:
                raise InputError(f"unknown relation {rel!r}")
            rhs = float(rhs)
            if not (np.all(np.isfinite(coeffs)) and np.isfinite(rhs)):
                raise InputError("constraint data must be finite")
            rows.append((coeffs, _REL_ALIASES[rel], rhs))
        self.constraints = rows
        if self.bounds is not None:
            if len(self.bounds) != n:
                raise InputError(f"got {len(self.bounds)} bounds for {n} variables")
            clean = []
            for lo, hi in self.bounds:
                lo = None if lo is None else float(lo)
                hi = None if hi is None else float(hi)
                if (lo is not None and not np.isfinite(lo)) or (hi is not None and not np.isfinite(hi)):
                    raise InputError("supplied bounds must be finite (use None for no bound)")
                clean.append((lo, hi))
            self.bounds = clean

    @property
    def variable_count(self):
        return self.objective.size


@dataclass
class LPResult:
    status: str
    value: float
    x: np.ndarray
    certificate: np.ndarray = None
    iterations: int = 0

    @property
    def optimal(self):
        return self.status == OPTIMAL


def constraint_residual(lp, x):
    """Largest violation of any constraint or bound at ``x``."""
    worst = 0.0
    for coeffs, rel, rhs in lp.constraints:
        lhs = float(coeffs @ x)
        if rel == "<=":
            worst = max(worst, lhs - rhs)
        elif rel == ">=":
            worst = max(worst, rhs - lhs)
        else:
            worst = max(worst, abs(lhs - rhs))
    if lp.bounds is not None:
        for xi, (lo, hi) in zip(x, lp.bounds):
            if lo is not None:
                worst = max(worst, lo - xi)
            if hi is not None:
                worst = max(worst, xi - hi)
    return worst


def solve_lp(lp, tol=1e-9, max_iter=None):
    """Solve ``lp`` with the two-phase simplex method.

    Raises :class:`SolverError` if the pivot budget runs out; never returns a
    result it has not finished computing.

    >>> r = solve_lp(LinearProgram([1.0], [([1.0], "<=", 3.0)], bounds=[(0, None)]))
    >>> r.status, round(r.value, 12)
    ('optimal', 3.0)
    """
    if not tol > 0:
        raise InputError("tol must be positive")
    n = lp.variable_count
    bounds = lp.bounds if lp.bounds is not None else [(None, None)] * n

    # Substitute every variable by nonnegative columns: x = shift + sum(sign * y).
    col_var, col_sign = [], []
    shift = np.zeros(n)
    extra_rows = []
    for k, (lo, hi) in enumerate(bounds):
        if lo is not None:
            shift[k] = lo
            col_var.append(k)
            col_sign.append(1.0)
            if hi is not None:
                if hi < lo:
                    return LPResult(INFEASIBLE, np.nan, np.full(n, np.nan))
                extra_rows.append((len(col_var) - 1, hi - lo))
        elif hi is not None:
            shift[k] = hi
            col_var.append(k)
            col_sign.append(-1.0)
        else:
            col_var += [k, k]
            col_sign += [1.0, -1.0]
    n_struct = len(col_var)
    col_var = np.array(col_var)
    col_sign = np.array(col_sign)

    rows, rels, rhs = [], [], []
    for coeffs, rel, b in lp.constraints:
        rows.append(coeffs[col_var] * col_sign)
        rels.append(rel)
        rhs.append(b - float(coeffs @ shift))
    n_user = len(rows)
    for col, width in extra_rows:
        e = np.zeros(n_struct)
        e[col] = 1.0
        rows.append(e)
        rels.append("<=")
        rhs.append(width)
    m = len(rows)

    cost = lp.objective[col_var] * col_sign
    if lp.sense == "max":
        cost = -cost

    if m == 0:
        if np.any(cost < -tol):
            return LPResult(UNBOUNDED, np.inf if lp.sense == "max" else -np.inf, np.full(n, np.nan))
        return LPResult(OPTIMAL, float(lp.objective @ shift), shift.copy(), np.zeros(0))

    A = np.array(rows, dtype=float).reshape(m, n_struct)
    b = np.array(rhs, dtype=float)
    flipped = b < 0
    A[flipped] *= -1.0
    b[flipped] *= -1.0
    rels = [("<=" if r == ">=" else ">=" if r == "<=" else r) if f else r
            for r, f in zip(rels, flipped)]

    n_slack = sum(1 for r in rels if r != "==")
    n_art = sum(1 for r in rels if r != "<=")
    N = n_struct + n_slack + n_art
    T = np.zeros((m + 1, N + 1))
    T[:m, :n_struct] = A
    T[:m, N] = b
    basis = np.empty(m, dtype=np.intp)
    unit_col = np.empty(m, dtype=np.intp)
    art_rows = []
    s = n_struct
    a = n_struct + n_slack
    for i, rel in enumerate(rels):
        if rel == "<=":
            T[i, s] = 1.0
            basis[i] = unit_col[i] = s
            s += 1
            continue
        if rel == ">=":
            T[i, s] = -1.0
            s += 1
        T[i, a] = 1.0
        basis[i] = unit_col[i] = a
        art_rows.append(i)
        a += 1

    if max_iter is None:
        max_iter = 5000 + 50 * (m + N)
    run = _kernels.run_simplex
    total_iters = 0

    if art_rows:
        T[m, :] = 0.0
        for i in art_rows:
            T[m, :] -= T[i, :]
        T[m, n_struct + n_slack:N] = 0.0
        status, iters = run(T, basis, N, max_iter, tol)
        total_iters += iters
        if status == 2:
            raise SolverError(f"simplex phase 1 hit the iteration cap ({max_iter})")
        infeasibility = -T[m, N]
        if infeasibility > tol * max(1.0, float(np.max(b))):
            # Phase-1 duals (artificial costs are 1) form a Farkas-type certificate.
            y = -T[m, unit_col]
            y[art_rows] += 1.0
            y[flipped] *= -1.0
            return LPResult(INFEASIBLE, np.nan, np.full(n, np.nan), y[:n_user], total_iters)
        art_start = n_struct + n_slack
        for i in range(m):
            if basis[i] >= art_start:
                row = np.abs(T[i, :art_start])
                j = int(np.argmax(row > tol)) if np.any(row > tol) else -1
                if j >= 0:
                    pivot(T, i, j)
                    basis[i] = j

    T[m, :] = 0.0
    T[m, :n_struct] = cost
    for i in range(m):
        cb = T[m, basis[i]]
        if cb != 0.0:
            T[m, :] -= cb * T[i, :]
    status, iters = run(T, basis, n_struct + n_slack, max_iter, tol)
    total_iters += iters
    if status == 2:
        raise SolverError(f"simplex phase 2 hit the iteration cap ({max_iter})")
    if status == 1:
        val = np.inf if lp.sense == "max" else -np.inf
        return LPResult(UNBOUNDED, val, np.full(n, np.nan), None, total_iters)

    ystruct = np.zeros(N)
    ystruct[basis] = T[:m, N]
    x = shift.copy()
    np.add.at(x, col_var, col_sign * ystruct[:n_struct])
    duals = -T[m, unit_col]
    duals[flipped] *= -1.0
    if lp.sense == "max":
        duals = -duals
    return LPResult(OPTIMAL, float(lp.objective @ x), x, duals[:n_user], total_iters)


def max_margin_feasibility(nonstrict, strict, dim, tol=1e-9):
    """Largest ``delta`` with ``<p,a> <= 0`` (nonstrict), ``<q,a> >= delta`` (strict).

    ``a`` ranges over the box ``[-1, 1]^dim`` so the margin is finite.  A
    positive margin means the strict system ``<q,a> > 0`` for every strict
    ``q`` is solvable inside the nonstrict cone.  Returns ``(margin, a)``.
    """
    strict = [np.asarray(q, dtype=float).ravel() for q in strict]
    nonstrict = [np.asarray(p, dtype=float).ravel() for p in nonstrict]
    if not strict:
        raise InputError("max_margin_feasibility needs at least one strict normal")
    for v in strict + nonstrict:
        if v.size != dim:
            raise InputError(f"normal of length {v.size} does not match dim {dim}")
    objective = np.zeros(dim + 1)
    objective[dim] = 1.0
    cons = []
    for p in nonstrict:
        cons.append((np.append(p, 0.0), "<=", 0.0))
    for q in strict:
        cons.append((np.append(q, -1.0), ">=", 0.0))
    bounds = [(-1.0, 1.0)] * dim + [(0.0, None)]
    res = solve_lp(LinearProgram(objective, cons, bounds, "max"), tol=tol)
    if res.status != OPTIMAL:
        raise SolverError(f"margin LP returned {res.status}; it is always feasible and bounded")
    return max(res.value, 0.0), res.x[:dim]


def split_blocks(x, simplex_dims):
    """Split a flat vector into consecutive blocks of the given sizes."""
    return np.split(np.asarray(x), np.cumsum(simplex_dims)[:-1])


def minimize_convex_over_simplices(f, grad, simplex_dims, tol=1e-6, max_iter=100000,
                                   eta0=1.0, full_output=False, x0=None):
    """Minimize a smooth convex ``f`` over a product of probability simplices.

    ``f`` and ``grad`` take the concatenated flat vector.  Exponentiated
    gradient steps of size ``eta0 / sqrt(1 + t/100)`` are taken from the
    barycenter (or from the interior point ``x0``); a step that fails to decrease ``f`` is retried with half the
    base step.  Iteration stops once the Frank-Wolfe gap, an upper bound on
    ``f(x) - min f``, drops to ``tol``.

    Returns ``(value, x)``, or ``(value, x, gap, iterations)`` with
    ``full_output``.
    """
    dims = [int(d) for d in simplex_dims]
    if not dims or min(dims) < 1:
        raise InputError("simplex_dims must be a nonempty list of positive sizes")
    starts = np.concatenate([[0], np.cumsum(dims)])
    floor = 1e-300
    if x0 is None:
        x = np.concatenate([np.full(d, 1.0 / d) for d in dims])
    else:
        x = np.maximum(np.asarray(x0, dtype=float).ravel(), floor)
        if x.size != starts[-1]:
            raise InputError("x0 does not match simplex_dims")
        x = np.concatenate([b / b.sum() for b in np.split(x, starts[1:-1])])

    def gap_of(g, x):
        total = 0.0
        for k in range(len(dims)):
            gb = g[starts[k]:starts[k + 1]]
            xb = x[starts[k]:starts[k + 1]]
            total += float(gb @ xb - gb.min())
        return total

    x_cur = x
    fx = float(f(x_cur))
    if not np.isfinite(fx):
        raise NumericError("objective is not finite at the starting point")
    step = float(eta0)
    t = 0
    for it in range(max_iter):
        g = np.asarray(grad(x_cur), dtype=float)
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient at an interior point")
        gap = gap_of(g, x_cur)
        if gap <= tol:
            return (fx, x_cur, gap, it) if full_output else (fx, x_cur)
        while True:
            eta = step / np.sqrt(1.0 + t / 100.0)
            x_new = np.empty_like(x_cur)
            for k in range(len(dims)):
                lo, hi = starts[k], starts[k + 1]
                gb = g[lo:hi]
                w = x_cur[lo:hi] * np.exp(-eta * (gb - gb.min()))
                w = np.maximum(w / w.sum(), floor)
                x_new[lo:hi] = w / w.sum()
            f_new = float(f(x_new))
            if np.isfinite(f_new):
                noise = 1e-13 * max(1.0, abs(fx))
                if f_new <= fx - noise:
                    break
                if f_new <= fx + noise:
                    # Value differences are at round-off level; judge the step by its gap.
                    g_new = np.asarray(grad(x_new), dtype=float)
                    new_gap = gap_of(g_new, x_new) if np.all(np.isfinite(g_new)) else np.inf
                    if new_gap < gap:
                        break
            step *= 0.5
            if step < 1e-30:
                # No descent possible at machine precision; the current point is as good as it gets.
                return (fx, x_cur, gap, it) if full_output else (fx, x_cur)
        x_cur, fx = x_new, f_new
        step = min(step * 1.05, 1e6)
        t += 1
    raise SolverError(f"exponentiated gradient did not reach gap {tol} in {max_iter} iterations")
