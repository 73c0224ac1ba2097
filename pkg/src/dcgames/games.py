"""The channel coding game: strategies, exhaustive verification and synthesis.

A team strategy is a codebook ``m -> x^n``, a portfolio policy
``(m, y^{i-1}) -> w_i`` and a decoder ``y^n -> m``.  Output sequences are
handled internally as tuples of output indices; labels only appear at the
edges (reports, JSON).
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import channels as ch
from .cones import DCCone, contains_portfolio, degraded_witness, dual
from .errors import DualityViolation, InputError, ResourceError, SynthesisError
from .lp import LinearProgram, OPTIMAL, solve_lp

NODE_CAP = 10_000_000
DEFAULT_TOL = 1e-9

SCHEME_MODELS = ("dmc", "dmc_feedback", "avcf", "zero_error", "zero_error_feedback")


def resolve_symbol(alphabet, s):
    """Index of ``s`` in ``alphabet``: a label first, else an integer position."""
    label = str(s)
    if label in alphabet._index:
        return alphabet._index[label]
    if isinstance(s, (int, np.integer)) and 0 <= int(s) < len(alphabet):
        return int(s)
    raise InputError(f"symbol {s!r} is not in {alphabet!r}")


@dataclass
class GameSpec:
    channel: object
    n: int
    L: int
    eps: float
    prefix_rule: bool = False

    def __post_init__(self):
        self.n, self.L = int(self.n), int(self.L)
        if self.n < 1 or self.L < 1:
            raise InputError("blocklength and message count must be at least 1")
        if not 0.0 < self.eps < 1.0:
            raise InputError("the maximum loss must lie strictly between 0 and 1")


class TeamStrategy:
    """Codebook, portfolio policy and decoder.

    ``policy`` is a dict keyed by ``(m, prefix)`` with ``prefix`` a tuple of
    output indices, or a callable with that signature.  ``decoder`` is a dict
    keyed by output-index tuples or a callable; it may return ``None`` to
    signal a decoding failure, which counts as an error.
    """

    def __init__(self, codebook, policy, decoder, table=None):
        if isinstance(codebook, dict):
            codebook = [codebook[m] for m in sorted(codebook)]
        self.codebook = [tuple(c) for c in codebook]
        self.policy = policy
        self.decoder = decoder
        self.table = table

    def codeword(self, m):
        if not 0 <= m < len(self.codebook):
            raise InputError(f"no codeword for message {m}")
        return self.codebook[m]

    def portfolio(self, m, prefix):
        prefix = tuple(prefix)
        if callable(self.policy):
            w = self.policy(m, prefix)
        else:
            try:
                w = self.policy[(m, prefix)]
            except KeyError:
                raise InputError(f"policy is undefined at message {m}, prefix {prefix}") from None
        return np.asarray(w, dtype=float)

    def decode(self, y):
        y = tuple(y)
        if callable(self.decoder):
            return self.decoder(y)
        return self.decoder.get(y)


@dataclass
class CodingScheme:
    """A classical code for one of the channel models.

    ``codewords[m]`` is the noncausal input sequence (ignored for the feedback
    models, whose only noncausal input is the constant ``0``), ``causal(m, y_prefix)``
    the causal input (required for the feedback models and for AVCFs with more
    than one causal input), ``decoder`` as in :class:`TeamStrategy`.
    """

    codewords: list
    decoder: object
    model: str = "dmc"
    causal: object = None
    n: int = None

    def __post_init__(self):
        if self.model not in SCHEME_MODELS:
            raise InputError(f"unknown scheme model {self.model!r}")
        if self.model.endswith("feedback") and self.causal is None:
            raise InputError(f"a {self.model} scheme needs a causal input policy")
        if self.n is None:
            if not self.codewords or self.codewords[0] is None:
                raise InputError("blocklength is unknown: give codewords or n")
            self.n = len(self.codewords[0])
        if any(c is not None and len(c) != self.n for c in self.codewords):
            raise InputError("all codewords must have the blocklength")

    @property
    def L(self):
        return len(self.codewords)


@dataclass
class MartingaleTable:
    """Worst-case conditional error probabilities ``P_e(m, y^i)`` for every prefix."""

    values: dict
    n: int
    L: int
    causal: dict = field(default_factory=dict)

    def __call__(self, m, prefix=()):
        return self.values[(m, tuple(prefix))]

    def error(self, m):
        return self.values[(m, ())]

    @property
    def max_error(self):
        return max(self.error(m) for m in range(self.L))


@dataclass
class VerifyReport:
    verdict: str
    min_payoff: float
    worst_path: tuple
    violations: list
    prefix_violations: list
    nodes: int
    paths: list = None

    @property
    def win(self):
        return self.verdict == "win"


def _decoder_callable(decoder, outputs=None):
    if callable(decoder):
        return decoder
    table = {}
    for key, m in decoder.items():
        if isinstance(key, str):
            key = key.split(",") if key else ()
        if outputs is not None:
            key = tuple(resolve_symbol(outputs, y) for y in key)
        table[tuple(key)] = m
    return table.get


# ---------------------------------------------------------------------------
# Verification


def verify_game(spec, strategy, tol=DEFAULT_TOL, node_cap=NODE_CAP, collect_paths=False):
    """Play every message against every output sequence.

    The adversary's choices branch after each portfolio is fixed.  A
    portfolio outside its channel cone is recorded as a violation (and makes
    the verdict ``lose``) rather than raised, so corrupted strategies come
    back with a diagnostic.
    """
    W, n, L, eps = spec.channel, spec.n, spec.L, spec.eps
    ny = len(W.outputs)
    nodes_needed = L * sum(ny ** i for i in range(n + 1))
    if nodes_needed > node_cap:
        raise ResourceError(f"{nodes_needed} game-tree nodes exceed the cap {node_cap}")
    decode = _decoder_callable(strategy.decoder, W.outputs) if not callable(strategy.decoder) else strategy.decoder
    member = {}
    state = {"min": np.inf, "worst": None, "nodes": 0}
    violations, prefix_violations = [], []
    paths = [] if collect_paths else None
    floor = -eps - tol

    def visit(m, xs, prefix, running):
        state["nodes"] += 1
        i = len(prefix)
        if i == n:
            m_hat = decode(prefix)
            payoff = running - (0.0 if m_hat == m else 1.0)
            if paths is not None:
                paths.append((m, prefix, payoff))
            if payoff < state["min"]:
                state["min"], state["worst"] = payoff, (m, prefix)
            return
        w = strategy.portfolio(m, prefix)
        if w.shape != (ny,):
            raise InputError(f"portfolio at message {m}, prefix {prefix} has shape {w.shape}")
        key = (xs[i], w.tobytes())
        if key not in member:
            member[key] = contains_portfolio(W.cone(xs[i]), w, tol)
        if not member[key]:
            violations.append((m, prefix, W.inputs.symbols[xs[i]]))
        for y in range(ny):
            total = running + w[y]
            if spec.prefix_rule and i + 1 < n and total < floor:
                prefix_violations.append((m, prefix + (y,), total))
            visit(m, xs, prefix + (y,), total)

    for m in range(L):
        xs = tuple(resolve_symbol(W.inputs, x) for x in strategy.codeword(m))
        if len(xs) != n:
            raise InputError(f"codeword for message {m} has length {len(xs)}, expected {n}")
        visit(m, xs, (), 0.0)

    win = state["min"] >= floor and not violations and not prefix_violations
    worst = state["worst"]
    if worst is not None:
        worst = (worst[0], tuple(W.outputs.symbols[y] for y in worst[1]))
    return VerifyReport("win" if win else "lose", float(state["min"]), worst, violations,
                        prefix_violations, state["nodes"], paths)


# ---------------------------------------------------------------------------
# Worst-case error and martingale synthesis


def _model_kernel(scheme, model):
    """The AVCF kernel ``(|X|, |Z|, |V|, |Y|)`` that the scheme runs on."""
    tag = scheme.model
    if tag in ("dmc", "dmc_feedback"):
        if not isinstance(model, ch.DMCKernel):
            raise InputError(f"a {tag} scheme needs a DMCKernel model")
        K = model.as_avcf()
        if tag == "dmc_feedback":
            K = ch.AVCFKernel(K.p.transpose(1, 0, 2, 3), ["0"], model.inputs, ["0"], model.outputs)
        return K
    if tag in ("zero_error", "zero_error_feedback"):
        if not isinstance(model, ch.BipartiteGraph):
            raise InputError(f"a {tag} scheme needs a BipartiteGraph model")
        return model.as_avcf() if tag == "zero_error" else model.as_feedback_avcf()
    if not isinstance(model, ch.AVCFKernel):
        raise InputError("an avcf scheme needs an AVCFKernel model")
    return model


def _noncausal(scheme, K, m):
    if scheme.model.endswith("feedback"):
        return (0,) * scheme.n
    return tuple(resolve_symbol(K.inputs, x) for x in scheme.codewords[m])


def _causal(scheme, K, m, prefix):
    if scheme.causal is None:
        if len(K.causal) != 1:
            raise InputError("the model has causal inputs but the scheme gives no causal policy")
        return 0
    try:
        z = scheme.causal(m, prefix) if callable(scheme.causal) else scheme.causal[(m, prefix)]
    except KeyError:
        raise InputError(f"causal policy is undefined at message {m}, prefix {prefix}") from None
    return resolve_symbol(K.causal, z)


def worst_case_error(scheme, model, cap=NODE_CAP):
    """``max_m P_e(m, ())`` under the worst causal adversary, with the full table.

    Backward recursion ``P_e(m, y^{i-1}) = max_v <p(.|x_i, z_i, v), P_e(m, y^{i-1}, .)>``
    from the leaves ``P_e(m, y^n) = 1{decoder(y^n) != m}``.
    """
    K = _model_kernel(scheme, model)
    n, L = scheme.n, scheme.L
    ny = len(K.outputs)
    if L * ny ** n > cap:
        raise ResourceError(f"{L} x {ny}^{n} leaves exceed the cap {cap}")
    decode = _decoder_callable(scheme.decoder, K.outputs)
    values, causal = {}, {}

    def rec(m, xs, prefix):
        i = len(prefix)
        if i == n:
            v = 0.0 if decode(prefix) == m else 1.0
        else:
            z = _causal(scheme, K, m, prefix)
            causal[(m, prefix)] = z
            child = np.array([rec(m, xs, prefix + (y,)) for y in range(ny)])
            v = float(np.max(K.p[xs[i], z] @ child))
        values[(m, prefix)] = v
        return v

    for m in range(L):
        rec(m, _noncausal(scheme, K, m), ())
    table = MartingaleTable(values, n, L, causal)
    return table.max_error, table


def game_channel(scheme, model):
    """The game channel that a scheme's strategies are played on."""
    tag = scheme.model
    if tag == "dmc":
        return ch.dmc(model.rows, model.inputs, model.outputs)
    if tag == "dmc_feedback":
        return ch.dmc_feedback(model.rows, model.inputs, model.outputs)
    if tag in ("zero_error", "zero_error_feedback"):
        edges = [(model.inputs.symbols[x], model.outputs.symbols[y]) for x, y in sorted(model.edges)]
        build = ch.adversarial if tag == "zero_error" else ch.adversarial_feedback
        return build(edges, model.inputs, model.outputs)
    return ch.avcf(model.p, model.inputs, model.causal, model.adversary, model.outputs)


def _check_memberships(W, strategy, n, L, tol):
    ny = len(W.outputs)
    seen = {}
    for m in range(L):
        xs = tuple(resolve_symbol(W.inputs, x) for x in strategy.codeword(m))
        for i in range(n):
            for prefix in itertools.product(range(ny), repeat=i):
                w = strategy.portfolio(m, prefix)
                key = (xs[i], w.tobytes())
                if key not in seen:
                    seen[key] = contains_portfolio(W.cone(xs[i]), w, tol)
                if not seen[key]:
                    raise SynthesisError(
                        f"portfolio {w} at message {m}, prefix {prefix} is outside "
                        f"W({W.inputs.symbols[xs[i]]})", message_index=m, prefix=prefix)


def synthesize_strategy(kind, scheme, model, tol=DEFAULT_TOL):
    """Turn a classical code into a team strategy and check every portfolio.

    ``martingale``: ``w_i(y) = P_e(m, y^{i-1} y) - P_e(m, y^{i-1})``.
    ``zero_error``: ``w_i(y) = 1{(x_i, y) not an edge}``.
    ``zero_error_feedback``: the same with the causal input in place of ``x_i``.
    Returns ``(strategy, channel)``.
    """
    W = game_channel(scheme, model)
    K = _model_kernel(scheme, model)
    n, L, ny = scheme.n, scheme.L, len(K.outputs)
    codebook = [tuple(K.inputs.symbols[x] for x in _noncausal(scheme, K, m)) for m in range(L)]
    decoder = _decoder_callable(scheme.decoder, K.outputs)
    table = None
    if kind == "martingale":
        _, table = worst_case_error(scheme, model)
        values = table.values
        policy = {}
        for (m, prefix), v in values.items():
            if len(prefix) < n:
                policy[(m, prefix)] = np.array([values[(m, prefix + (y,))] for y in range(ny)]) - v
    elif kind in ("zero_error", "zero_error_feedback"):
        if scheme.model != kind or not isinstance(model, ch.BipartiteGraph):
            raise InputError(f"{kind} synthesis needs a {kind} scheme on a BipartiteGraph")
        off = [np.array([0.0 if model.has_edge(x, y) else 1.0 for y in range(ny)])
               for x in range(len(model.inputs))]
        policy = {}
        for m in range(L):
            xs = _noncausal(scheme, K, m)
            for i in range(n):
                for prefix in itertools.product(range(ny), repeat=i):
                    x = xs[i] if kind == "zero_error" else _causal(scheme, K, m, prefix)
                    policy[(m, prefix)] = off[x]
    else:
        raise InputError(f"unknown synthesis kind {kind!r}")
    strategy = TeamStrategy(codebook, policy, decoder, table)
    _check_memberships(W, strategy, n, L, tol)
    return strategy, W


# ---------------------------------------------------------------------------
# Zero-error codes


def consistency_decoder(codewords, graph):
    """Decode ``y^n`` to the unique codeword that could have produced it (else ``None``)."""
    code = [tuple(resolve_symbol(graph.inputs, x) for x in c) for c in codewords]

    def decode(y):
        hits = [m for m, xs in enumerate(code) if all(graph.has_edge(x, b) for x, b in zip(xs, y))]
        return hits[0] if len(hits) == 1 else None

    return decode


def check_zero_error_code(codewords, decoder, graph, n=None, L=None, cap=NODE_CAP):
    """Every output sequence reachable from codeword ``m`` decodes to ``m``."""
    L = len(codewords) if L is None else L
    n = len(codewords[0]) if n is None else n
    if len(codewords) != L or any(len(c) != n for c in codewords):
        raise InputError("codebook does not match (n, L)")
    decode = _decoder_callable(decoder, graph.outputs)
    for m, c in enumerate(codewords):
        xs = [resolve_symbol(graph.inputs, x) for x in c]
        reach = [graph.neighbors[x] for x in xs]
        if float(np.prod([len(r) for r in reach])) > cap:
            raise ResourceError("reachable output sequences exceed the cap")
        for y in itertools.product(*reach):
            if decode(y) != m:
                return False
    return True


# ---------------------------------------------------------------------------
# Adversarial cost game


def dual_violation_witness(w, cone, bound=1e3, tol=DEFAULT_TOL):
    """A cost ``t`` in ``cone`` with ``t(y) + w(y) > 0`` for every ``y``, or ``None``.

    Such a ``t`` exists exactly when ``w`` is outside the dual of ``cone``.
    """
    w = np.asarray(w, dtype=float)
    d = w.size
    for c in cone.cells:
        # maximize delta subject to t in the cell, t(y) + w(y) >= delta, |t| <= bound
        cons = [(np.append(p, 0.0), "<=", 0.0) for p in c.normals]
        for y in range(d):
            row = np.zeros(d + 1)
            row[y], row[-1] = -1.0, 1.0
            cons.append((row, "<=", w[y]))
        obj = np.zeros(d + 1)
        obj[-1] = 1.0
        bounds = [(-bound, bound)] * d + [(None, 1.0)]
        res = solve_lp(LinearProgram(obj, cons, bounds, "max"))
        if res.status == OPTIMAL and res.value > tol:
            return res.x[:d]
    return None


@dataclass
class AcccgReport:
    verdict: str
    min_payoff: float
    worst: tuple
    sequences: int
    label: str = "bounded falsifier: sound for losses it finds, silent on costs outside the grid"


class AdversarialCostStrategy:
    """The encoder side of the adversarial cost game built from a dual-channel strategy.

    On cost ``t_i`` the encoder answers the smallest ``y`` with
    ``t_i(y) + w_i(y) <= tol``, where ``w_i`` is the channel-game portfolio.
    """

    def __init__(self, strategy, T, tol=DEFAULT_TOL):
        self.strategy = strategy
        self.T = T
        self.tol = tol

    def respond(self, m, prefix, t):
        prefix = tuple(prefix)
        w = self.strategy.portfolio(m, prefix)
        t = np.asarray(t, dtype=float)
        ok = np.flatnonzero(t + w <= self.tol)
        if ok.size == 0:
            raise DualityViolation(
                f"no output answers cost {t} at message {m}, prefix {prefix}: "
                "the portfolio is outside the dual cone", message_index=m, prefix=prefix)
        return int(ok[0])

    def play(self, m, costs):
        """Run one game against the cost sequence; returns ``(y^n, payoff)``."""
        prefix, paid = (), 0.0
        xs = self.strategy.codeword(m)
        for i, t in enumerate(costs):
            x = resolve_symbol(self.T.inputs, xs[i])
            if not contains_portfolio(self.T.cone(x), t, self.tol):
                raise InputError(f"cost {t} at step {i} is not in T({self.T.inputs.symbols[x]})")
            y = self.respond(m, prefix, t)
            paid += float(np.asarray(t, dtype=float)[y])
            prefix += (y,)
        decode = self.strategy.decoder
        decode = decode if callable(decode) else _decoder_callable(decode, self.T.outputs)
        return prefix, -paid - (0.0 if decode(prefix) == m else 1.0)

    def falsify(self, n, L, eps, generators, gammas=(0.0, 0.5, 1.0, 2.0, 5.0), cap=NODE_CAP):
        """Play every cost sequence drawn from ``gamma * g``, ``g`` in ``generators[x]``.

        ``generators`` maps an input label to a list of cost vectors in ``T(x)``.
        A ``lose`` verdict is a genuine counterexample; ``win`` only covers the grid.
        """
        best, worst, count = np.inf, None, 0
        for m in range(L):
            xs = [resolve_symbol(self.T.inputs, x) for x in self.strategy.codeword(m)]
            menus = []
            for x in xs:
                gens = generators.get(self.T.inputs.symbols[x], generators.get(x))
                if gens is None:
                    raise InputError(f"no cost generators for input {self.T.inputs.symbols[x]}")
                menus.append([g * np.asarray(v, dtype=float) for v in gens for g in gammas])
            size = float(np.prod([len(mn) for mn in menus]))
            if count + size > cap:
                raise ResourceError("cost sequences exceed the cap")
            for costs in itertools.product(*menus):
                count += 1
                _, payoff = self.play(m, costs)
                if payoff < best:
                    best, worst = payoff, (m, tuple(np.asarray(c).tolist() for c in costs))
        verdict = "win" if best >= -eps - self.tol else "lose"
        return AcccgReport(verdict, float(best), worst, count)


def transform_acccg(strategy, T, n=None, L=None, tol=DEFAULT_TOL):
    """Adversarial-cost strategy from a channel-game strategy for ``dual_channel(T)``.

    With ``n`` and ``L`` given, every reachable portfolio is first checked to
    lie in the dual cone; the first one that does not raises
    :class:`DualityViolation` at its step.
    """
    if n is not None and L is not None:
        duals = {}
        ny = len(T.outputs)
        for m in range(L):
            xs = [resolve_symbol(T.inputs, x) for x in strategy.codeword(m)]
            for i in range(n):
                for prefix in itertools.product(range(ny), repeat=i):
                    x = xs[i]
                    if x not in duals:
                        duals[x] = dual(T.cone(x))
                    w = strategy.portfolio(m, prefix)
                    if not contains_portfolio(duals[x], w, tol):
                        raise DualityViolation(
                            f"portfolio {w} at message {m}, prefix {prefix} is outside the dual "
                            f"of T({T.inputs.symbols[x]})", message_index=m, prefix=prefix)
    return AdversarialCostStrategy(strategy, T, tol)


# ---------------------------------------------------------------------------
# Mail insurance


def mail_failure_table(n, k, p):
    """``P_e(i, t)``: probability of fewer than ``k`` deliveries after ``i`` mails with ``t`` delivered."""
    Pe = np.zeros((n + 1, n + 2))
    Pe[n, : n + 1] = (np.arange(n + 1) < k).astype(float)
    for i in range(n - 1, -1, -1):
        t = np.arange(i + 1)
        Pe[i, : i + 1] = (1 - p) * Pe[i + 1, t + 1] + p * Pe[i + 1, t]
    return Pe


def mail_insurance(n, k, p):
    """Dynamic hedging for ``n`` mails when any ``k`` deliveries suffice.

    The game runs on the erasure channel with a single message; the decoder
    fails (returns ``None``) when fewer than ``k`` mails arrive.  The policy is
    computed lazily from the ``(i, t)`` table, so large ``n`` is cheap as long as
    nobody enumerates all paths.  Returns ``(strategy, constant_loss)``.
    """
    n, k = int(n), int(k)
    if not 1 <= k <= n:
        raise InputError("need 1 <= k <= n")
    if not 0.0 < p < 1.0:
        raise InputError("loss probability must lie strictly between 0 and 1")
    Pe = mail_failure_table(n, k, p)
    delivered = ch.Alphabet([ch.DELIVERED, ch.LOST]).index(ch.DELIVERED)

    def policy(m, prefix):
        i = len(prefix)
        t = sum(1 for y in prefix if y == delivered)
        base = Pe[i, t]
        w = np.empty(2)
        w[delivered] = Pe[i + 1, t + 1] - base
        w[1 - delivered] = Pe[i + 1, t] - base
        return w

    def decoder(y):
        return 0 if sum(1 for b in y if b == delivered) >= k else None

    strategy = TeamStrategy([("0",) * n], policy, decoder)
    return strategy, float(Pe[0, 0])


def mail_game(n, k, p, eps=None):
    """The game spec matching :func:`mail_insurance` (``eps`` defaults to the constant loss)."""
    _, loss = mail_insurance(n, k, p)
    eps = min(max(loss, 1e-12), 1 - 1e-12) if eps is None else eps
    return GameSpec(ch.erasure(p), n, 1, eps)


# ---------------------------------------------------------------------------
# Coding as degradedness


def coding_feasible_by_degradedness(W, n, L, eps, cap=None, tol=DEFAULT_TOL):
    """Whether the requirement cone is a deterministic degradation of the ``n``-use cone.

    Enumerates all decoders ``f: Y^n -> [L]``; each requirement cell (one per
    message) must land inside the pushforward of some codeword cell.
    """
    if L == 1:
        return True
    R = ch.requirement_cone(L, eps)
    A = ch.n_use_cone(W, n, "all")
    kwargs = {} if cap is None else {"cap": cap}
    return degraded_witness(R, A, tol=tol, **kwargs) is not None
