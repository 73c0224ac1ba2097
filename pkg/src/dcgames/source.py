"""The lossless source coding game, the entropy of a cone and its achievability scheme.

The adversary reveals ``x_1, ..., x_n`` one symbol at a time; before each
symbol the team buys a portfolio ``w_i`` from the cone, and at the end the
encoder sends ``m = f(x^n)`` and the decoder guesses ``g(m)``.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .capacity import entropy_bits
from .cones import DCCone, contains_portfolio, normalize
from .errors import InputError, ResourceError, SynthesisError
from .games import VerifyReport, resolve_symbol
from .lp import LinearProgram, OPTIMAL, solve_lp

NODE_CAP = 10_000_000
DEFAULT_TOL = 1e-9
SEARCH_SAMPLES = 200


class SourceStrategy:
    """Portfolio policy ``x^{i-1} -> w_i``, encoder ``x^n -> m`` and decoder ``m -> x^n``.

    Sequences are tuples of symbol indices.  ``policy`` and ``encoder`` may be
    dicts or callables; ``decoder`` may be a list, dict or callable.
    """

    def __init__(self, policy, encoder, decoder, table=None):
        self.policy = policy
        self.encoder = encoder
        self.decoder = decoder
        self.table = table

    def portfolio(self, prefix):
        prefix = tuple(prefix)
        if callable(self.policy):
            w = self.policy(prefix)
        else:
            try:
                w = self.policy[prefix]
            except KeyError:
                raise InputError(f"policy is undefined at prefix {prefix}") from None
        return np.asarray(w, dtype=float)

    def encode(self, x):
        x = tuple(x)
        if callable(self.encoder):
            return self.encoder(x)
        try:
            return self.encoder[x]
        except KeyError:
            raise InputError(f"encoder is undefined at {x}") from None

    def decode(self, m):
        if callable(self.decoder):
            return self.decoder(m)
        if isinstance(self.decoder, dict):
            return self.decoder.get(m)
        return self.decoder[m] if 0 <= m < len(self.decoder) else None


@dataclass
class SourceGameSpec:
    cone: DCCone
    n: int
    L: int
    eps: float
    strategy: SourceStrategy = None

    def __post_init__(self):
        self.n, self.L = int(self.n), int(self.L)
        if self.n < 1 or self.L < 1:
            raise InputError("blocklength and message count must be at least 1")
        if not 0.0 < self.eps < 1.0:
            raise InputError("the maximum loss must lie strictly between 0 and 1")


def verify_source_game(spec, tol=DEFAULT_TOL, node_cap=NODE_CAP, collect_paths=False):
    """Play the strategy against every source sequence ``x^n``."""
    A, n, L, strat = spec.cone, spec.n, spec.L, spec.strategy
    if strat is None:
        raise InputError("the source game spec carries no strategy")
    d = A.dim
    if sum(d ** i for i in range(n + 1)) > node_cap:
        raise ResourceError(f"{d}^{n} source sequences exceed the cap {node_cap}")
    member = {}
    violations, paths = [], ([] if collect_paths else None)
    state = {"min": np.inf, "worst": None, "nodes": 0}

    def visit(prefix, running):
        state["nodes"] += 1
        if len(prefix) == n:
            m = strat.encode(prefix)
            ok = isinstance(m, (int, np.integer)) and 0 <= m < L and strat.decode(int(m)) is not None \
                and tuple(strat.decode(int(m))) == prefix
            payoff = running - (0.0 if ok else 1.0)
            if paths is not None:
                paths.append((prefix, payoff))
            if payoff < state["min"]:
                state["min"], state["worst"] = payoff, prefix
            return
        w = strat.portfolio(prefix)
        if w.shape != (d,):
            raise InputError(f"portfolio at prefix {prefix} has shape {w.shape}")
        key = w.tobytes()
        if key not in member:
            member[key] = contains_portfolio(A, w, tol)
        if not member[key]:
            violations.append((None, prefix, None))
        for x in range(d):
            visit(prefix + (x,), running + w[x])

    visit((), 0.0)
    win = state["min"] >= -spec.eps - tol and not violations
    worst = None
    if state["worst"] is not None:
        worst = (None, tuple(A.alphabet.symbols[x] for x in state["worst"]))
    return VerifyReport("win" if win else "lose", float(state["min"]), worst, violations, [],
                        state["nodes"], paths)


# ---------------------------------------------------------------------------
# Entropy of a cone


def max_entropy_below(g, tol=1e-12):
    """``sup{H(p): p in simplex, <p, g> <= 0}`` in bits (``-inf`` if infeasible).

    The maximizer is uniform when that is feasible, otherwise the Gibbs
    distribution ``p ~ 2^{-theta g}`` with ``<p, g> = 0``.
    """
    g = np.asarray(g, dtype=float).ravel()
    d = g.size
    if g.min() > 0:
        return -np.inf
    if g.mean() <= 0:
        return float(np.log2(d))
    if g.min() == 0:
        return float(np.log2(np.count_nonzero(g == 0)))

    def tilt(theta):
        z = -theta * (g - g.min())
        p = np.exp2(z)
        return p / p.sum()

    lo, hi = 0.0, 1.0
    while tilt(hi) @ g > 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if tilt(mid) @ g > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(1.0, hi):
            break
    return entropy_bits(tilt(hi))


def _degenerate(A):
    if A.is_empty:
        return np.inf
    if A.has_full_cell:
        return -np.inf
    return None


def entropy_from_generators(generators):
    """``H`` of the downward closure of the rays through ``generators``."""
    gens = [np.asarray(g, dtype=float).ravel() for g in generators]
    if not gens:
        return np.inf
    return float(min(max_entropy_below(g) for g in gens))


def halfspace_optimal_portfolio(p):
    """The portfolio ``-log2 p - H(p)`` in ``p°`` that attains ``H(p°) = H(p)``."""
    p = normalize(p)
    with np.errstate(divide="ignore"):
        a = -np.log2(p)
    return a - entropy_bits(p)


def entropy_search(A, samples=SEARCH_SAMPLES, seed=0, tol=DEFAULT_TOL):
    """Best upper bound on ``H(A)`` over sampled cell portfolios, with the portfolio."""
    deg = _degenerate(A)
    if deg is not None:
        return deg, None
    rng = np.random.default_rng(seed)
    d = A.dim
    best, best_a = np.inf, None

    def consider(a):
        nonlocal best, best_a
        if not np.all(np.isfinite(a)) or not contains_portfolio(A, a, tol):
            return
        h = max_entropy_below(a)
        if h < best:
            best, best_a = h, a

    for c in A.cells:
        for p in c.normals:
            if np.all(p > 0):
                consider(halfspace_optimal_portfolio(p))
        cons = [(p, "<=", 0.0) for p in c.normals]
        for _ in range(max(1, samples // len(A.cells))):
            obj = rng.normal(size=d)
            res = solve_lp(LinearProgram(obj, cons, [(-1.0, 1.0)] * d, "max"))
            if res.status == OPTIMAL:
                consider(res.x)
    return float(best), best_a


def entropy(A, method="auto", tol=DEFAULT_TOL, samples=SEARCH_SAMPLES, seed=0):
    """``H(A) = inf_{a in A} sup{H(p): <p, a> <= 0}`` in bits.

    ``A`` is a :class:`DCCone`, or a list of generators for ``generator_form``.
    ``generator_form`` and ``halfspace_closed_form`` are exact;
    ``search_upper_bound`` returns a valid upper bound only.
    """
    if method == "auto":
        if not isinstance(A, DCCone):
            method = "generator_form"
        elif len(A.cells) == 1 and len(A.cells[0].normals) == 1:
            method = "halfspace_closed_form"
        else:
            method = "search_upper_bound"
    if method == "generator_form":
        if isinstance(A, DCCone):
            raise InputError("generator_form needs the cone as a list of generators")
        return entropy_from_generators(A)
    if not isinstance(A, DCCone):
        raise InputError(f"{method} needs a DCCone")
    deg = _degenerate(A)
    if deg is not None:
        return deg
    if method == "halfspace_closed_form":
        if len(A.cells) != 1 or len(A.cells[0].normals) != 1:
            raise InputError("halfspace_closed_form needs a single-halfspace cone")
        return entropy_bits(A.cells[0].normals[0])
    if method == "search_upper_bound":
        return entropy_search(A, samples, seed, tol)[0]
    raise InputError(f"unknown entropy method {method!r}")


# ---------------------------------------------------------------------------
# Martingale synthesis


def source_error_table(p, n, encoder, decoder):
    """``P_e(x^i) = P(g(f(X^n)) != X^n | X^i = x^i)`` for every prefix, ``X_i`` iid ``p``."""
    p = normalize(p)
    d = p.size
    table = {}

    def rec(prefix):
        if len(prefix) == n:
            m = encoder(prefix)
            xhat = decoder(m) if m is not None else None
            v = 0.0 if xhat is not None and tuple(xhat) == prefix else 1.0
        else:
            v = float(sum(p[x] * rec(prefix + (x,)) for x in range(d)))
        table[prefix] = v
        return v

    rec(())
    return table


def synthesize_source_strategy(p, n, codebook, tol=1e-12, cap=NODE_CAP):
    """Martingale strategy for ``A = p°`` from a lossless code.

    ``codebook`` lists the sequences that are sent exactly (as labels or
    indices); any other sequence is mapped to message 0.  Portfolios are
    ``w_i(x) = P_e(x^{i-1} x) - P_e(x^{i-1})``, so ``<p, w_i> = 0``.
    Returns ``(strategy, P_e(()))``.
    """
    p = normalize(p)
    if np.any(p < 0):
        raise InputError("p must be a probability vector")
    d = p.size
    if d ** n > cap:
        raise ResourceError(f"{d}^{n} sequences exceed the cap {cap}")
    code = [tuple(int(x) for x in c) for c in codebook]
    if any(len(c) != n for c in code):
        raise InputError("codewords must have length n")
    index = {c: m for m, c in enumerate(code)}
    encoder = lambda x: index.get(tuple(x), 0)
    decoder = lambda m: code[m] if 0 <= m < len(code) else None
    table = source_error_table(p, n, encoder, decoder)
    policy = {}
    for prefix, v in table.items():
        if len(prefix) < n:
            w = np.array([table[prefix + (x,)] for x in range(d)]) - v
            if abs(p @ w) > tol * 10 + 1e-12:
                raise SynthesisError(f"martingale condition fails at {prefix}: <p, w> = {p @ w}",
                                     prefix=prefix)
            policy[prefix] = w
    return SourceStrategy(policy, encoder, code, table), table[()]


# ---------------------------------------------------------------------------
# Type-class achievability


def compositions(n, k):
    """All ``k``-tuples of nonnegative integers summing to ``n``."""
    for cuts in itertools.combinations(range(n + k - 1), k - 1):
        prev, out = -1, []
        for c in cuts:
            out.append(c - prev - 1)
            prev = c
        out.append(n + k - 2 - prev)
        yield tuple(out)


def multinomial(counts):
    total, out = 0, 1
    for c in counts:
        total += c
        out *= math.comb(total, c)
    return out


def _type_sequences(counts):
    """Every sequence with the given symbol counts, in lexicographic order."""
    n = sum(counts)
    seqs, counts = [], list(counts)

    def rec(prefix):
        if len(prefix) == n:
            seqs.append(tuple(prefix))
            return
        for x, c in enumerate(counts):
            if c:
                counts[x] -= 1
                prefix.append(x)
                rec(prefix)
                prefix.pop()
                counts[x] += 1

    rec([])
    return seqs


def sanov_types(a, gamma, eps, n):
    """Type classes with empirical mean of ``a`` below ``(1 - eps) / gamma``."""
    a = np.asarray(a, dtype=float).ravel()
    thresh = (1.0 - eps) / gamma
    return [t for t in compositions(n, a.size) if np.dot(t, a) / n < thresh]


def sanov_exponent(a, gamma, eps):
    """``sup{H(p): <p, a> <= (1 - eps) / gamma}``, the growth rate of the set."""
    a = np.asarray(a, dtype=float).ravel()
    return max_entropy_below(a - (1.0 - eps) / gamma)


def sanov_growth(a, gamma, eps, ns):
    """``log2 |S| / n`` for each ``n`` (type-class counting, no enumeration)."""
    out = []
    for n in ns:
        size = sum(multinomial(t) for t in sanov_types(a, gamma, eps, n))
        out.append(math.log2(size) / n if size else -np.inf)
    return out


@dataclass
class SanovResult:
    S: list
    strategy: SourceStrategy
    bound: float
    bound_holds: bool
    exponent: float

    @property
    def size(self):
        return len(self.S)


def sanov_scheme(a, gamma, eps, n, cap=1_000_000):
    """The constant-portfolio scheme ``w_i = (gamma / n) a`` with an exact code on ``S``.

    ``S`` holds the sequences whose empirical mean of ``a`` is below
    ``(1 - eps) / gamma``; outside ``S`` the portfolios alone are meant to
    cover the loss.  Also checks ``|S| <= (n+1)^{|X|} 2^{n * exponent}``.
    """
    a = np.asarray(a, dtype=float).ravel()
    if gamma <= 0:
        raise InputError("gamma must be positive")
    if not 0.0 < eps < 1.0:
        raise InputError("eps must lie strictly between 0 and 1")
    types = sanov_types(a, gamma, eps, n)
    size = sum(multinomial(t) for t in types)
    if size > cap:
        raise ResourceError(f"|S| = {size} exceeds the cap {cap}")
    S = sorted(s for t in types for s in _type_sequences(t))
    index = {s: m for m, s in enumerate(S)}
    w = (gamma / n) * a
    strategy = SourceStrategy(lambda prefix: w, lambda x: index.get(tuple(x), 0), S)
    exponent = sanov_exponent(a, gamma, eps)
    bound = (n + 1) ** a.size * 2.0 ** (n * exponent) if np.isfinite(exponent) else (
        0.0 if exponent < 0 else np.inf)
    return SanovResult(S, strategy, float(bound), len(S) <= bound, float(exponent))


def source_symbols(alphabet, seq):
    return tuple(resolve_symbol(alphabet, x) for x in seq)
