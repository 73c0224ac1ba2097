"""Channel constructors: each input symbol is mapped to a pricing DC cone.

Probabilistic kernels become halfspace cones, adversarial (zero-error)
channels become indicator cells, and feedback is modelled by moving the
input choice into the encoder's per-step cell choice (a single input symbol
whose cone is a union).
"""

import itertools

import numpy as np

from . import cones as C
from .cones import Alphabet, ConeKernel, DCCone, as_alphabet
from .errors import InputError, ResourceError

N_USE_CAP = 200_000

DELIVERED = "delivered"
LOST = "lost"


class DMCKernel:
    """A stochastic matrix: one output distribution per input symbol."""

    def __init__(self, rows, inputs=None, outputs=None):
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2 or rows.size == 0:
            raise InputError("a DMC kernel is a nonempty 2-d array")
        if np.any(rows < 0) or not np.all(np.isfinite(rows)):
            raise InputError("kernel rows must be finite and nonnegative")
        sums = rows.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise InputError(f"kernel rows must sum to 1, got {sums}")
        self.rows = rows / sums[:, None]
        self.inputs = as_alphabet(inputs if inputs is not None else rows.shape[0])
        self.outputs = as_alphabet(outputs if outputs is not None else rows.shape[1])
        if len(self.inputs) != rows.shape[0] or len(self.outputs) != rows.shape[1]:
            raise InputError("alphabet sizes do not match the kernel shape")

    def as_avcf(self):
        p = self.rows[:, None, None, :]
        return AVCFKernel(p, self.inputs, Alphabet(["0"]), Alphabet(["0"]), self.outputs)


class AVCFKernel:
    """``p(y | x, z, v)`` as an array of shape ``(|X|, |Z|, |V|, |Y|)``.

    ``x`` is fixed in advance by the codebook, ``z`` is chosen causally by the
    encoder, ``v`` causally by the adversary.
    """

    def __init__(self, p, inputs=None, causal=None, adversary=None, outputs=None):
        p = np.asarray(p, dtype=float)
        if p.ndim != 4:
            raise InputError("an AVCF kernel has shape (|X|, |Z|, |V|, |Y|)")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise InputError("kernel entries must be finite and nonnegative")
        sums = p.sum(axis=3)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise InputError("every (x, z, v) row must sum to 1")
        self.p = p / sums[..., None]
        nx, nz, nv, ny = p.shape
        self.inputs = as_alphabet(inputs if inputs is not None else nx)
        self.causal = as_alphabet(causal if causal is not None else nz)
        self.adversary = as_alphabet(adversary if adversary is not None else nv)
        self.outputs = as_alphabet(outputs if outputs is not None else ny)
        if (len(self.inputs), len(self.causal), len(self.adversary), len(self.outputs)) != p.shape:
            raise InputError("alphabet sizes do not match the kernel shape")

    def as_avcf(self):
        return self


class BipartiteGraph:
    """Which outputs each input can produce."""

    def __init__(self, edges, inputs, outputs):
        self.inputs = as_alphabet(inputs)
        self.outputs = as_alphabet(outputs)
        clean = set()
        for x, y in edges:
            clean.add((self.inputs.index(x), self.outputs.index(y)))
        self.edges = frozenset(clean)
        self.neighbors = [sorted(y for (xx, y) in self.edges if xx == x) for x in range(len(self.inputs))]
        if any(not nb for nb in self.neighbors):
            raise InputError("every input needs at least one output edge")

    def has_edge(self, x, y):
        return (x, y) in self.edges

    def as_avcf(self):
        """Deterministic AVCF: the adversary names the output among the allowed ones."""
        nx, ny = len(self.inputs), len(self.outputs)
        p = np.zeros((nx, 1, ny, ny))
        for x in range(nx):
            for v in range(ny):
                y = v if (x, v) in self.edges else self.neighbors[x][0]
                p[x, 0, v, y] = 1.0
        return AVCFKernel(p, self.inputs, Alphabet(["0"]), self.outputs, self.outputs)

    def as_feedback_avcf(self):
        """Inputs moved into the causal slot, for adaptive (feedback) zero-error schemes."""
        base = self.as_avcf().p
        return AVCFKernel(base.transpose(1, 0, 2, 3), Alphabet(["0"]), self.inputs, self.outputs, self.outputs)


class GameChannel:
    """``W: X -> DCCone(Y)`` together with how it was built (for serialization)."""

    def __init__(self, kernel, kind="explicit", params=None):
        if not isinstance(kernel, ConeKernel):
            raise InputError("GameChannel wraps a ConeKernel")
        self.kernel = kernel
        self.kind = kind
        self.params = params or {}

    @property
    def inputs(self):
        return self.kernel.inputs

    @property
    def outputs(self):
        return self.kernel.outputs

    def cone(self, x):
        return self.kernel[x]

    def range_cone(self):
        """``W(X)``: the union of all input cones."""
        return DCCone(self.outputs, [c for cone in self.kernel.cones for c in cone.cells])

    def __repr__(self):
        return f"GameChannel({self.kind}, {len(self.inputs)} inputs, {len(self.outputs)} outputs)"


def _channel(inputs, cones, kind, params):
    return GameChannel(ConeKernel(inputs, cones), kind, params)


def dmc(rows, inputs=None, outputs=None):
    k = DMCKernel(rows, inputs, outputs)
    return _channel(k.inputs, [C.halfspace(r, k.outputs) for r in k.rows], "dmc",
                    {"rows": k.rows.tolist(), "inputs": list(k.inputs), "outputs": list(k.outputs)})


def dmc_feedback(rows, inputs=None, outputs=None):
    k = DMCKernel(rows, inputs, outputs)
    cone = DCCone(k.outputs, [[r] for r in k.rows])
    return _channel(["0"], [cone], "dmc_feedback",
                    {"rows": k.rows.tolist(), "inputs": list(k.inputs), "outputs": list(k.outputs)})


def bsc(beta, feedback=False):
    if not 0.0 <= beta <= 1.0:
        raise InputError("crossover probability must lie in [0, 1]")
    rows = [[1 - beta, beta], [beta, 1 - beta]]
    ch = dmc_feedback(rows) if feedback else dmc(rows)
    ch.kind = "bsc"
    ch.params = {"beta": beta, "feedback": bool(feedback)}
    return ch


def adversarial(edges, inputs, outputs):
    g = BipartiteGraph(edges, inputs, outputs)
    cones = [C.adversarial_cell([g.outputs.symbols[y] for y in nb], g.outputs) for nb in g.neighbors]
    return _channel(g.inputs, cones, "adversarial", _graph_params(g))


def adversarial_feedback(edges, inputs, outputs):
    g = BipartiteGraph(edges, inputs, outputs)
    d = len(g.outputs)
    cone = DCCone(g.outputs, [[C.indicator(d, y) for y in nb] for nb in g.neighbors])
    return _channel(["0"], [cone], "adversarial_feedback", _graph_params(g))


def _graph_params(g):
    edges = sorted((g.inputs.symbols[x], g.outputs.symbols[y]) for x, y in g.edges)
    return {"edges": [list(e) for e in edges], "inputs": list(g.inputs), "outputs": list(g.outputs)}


def covering_channel(edges, inputs, outputs):
    """Single-input channel ``U_{S covers X} cap_{y in S} e_y°`` over minimal covering sets ``S``."""
    g = BipartiteGraph(edges, inputs, outputs)
    d = len(g.outputs)
    covers = C.minimal_transversals([frozenset(nb) for nb in g.neighbors])
    cone = DCCone(g.outputs, [[C.indicator(d, y) for y in sorted(S)] for S in covers])
    return _channel(["0"], [cone], "explicit", {})


def avcf(p, inputs=None, causal=None, adversary=None, outputs=None):
    k = AVCFKernel(p, inputs, causal, adversary, outputs)
    cones = []
    for x in range(k.p.shape[0]):
        cells = [[k.p[x, z, v] for v in range(k.p.shape[2])] for z in range(k.p.shape[1])]
        cones.append(DCCone(k.outputs, cells))
    return _channel(k.inputs, cones, "avcf",
                    {"p": k.p.tolist(), "inputs": list(k.inputs), "causal": list(k.causal),
                     "adversary": list(k.adversary), "outputs": list(k.outputs)})


def erasure_generator(p):
    """The mail-insurance portfolio: lose 1 on delivery, collect ``1/p - 1`` on loss."""
    return np.array([-1.0, 1.0 / p - 1.0])


def erasure(p):
    """Single-use mail channel over (delivered, lost) from the insurance generator.

    The resulting cell is ``{a : a(delivered) <= 0, (1-p) a(delivered) + p a(lost) <= 0}``,
    i.e. the halfspace with implied loss probability ``p`` cut by the fact that
    the insurer never pays on delivery.
    """
    if not 0.0 < p < 1.0:
        raise InputError("loss probability must lie strictly between 0 and 1")
    out = Alphabet([DELIVERED, LOST])
    cone = C.from_generators([erasure_generator(p)], out)
    return _channel(["0"], [cone], "erasure", {"p": p})


def build_channel(kind, **params):
    """Construct a channel by kind name; see the module functions for parameters."""
    builders = {
        "dmc": dmc, "dmc_feedback": dmc_feedback, "adversarial": adversarial,
        "adversarial_feedback": adversarial_feedback, "avcf": avcf, "bsc": bsc, "erasure": erasure,
    }
    if kind not in builders:
        raise InputError(f"unknown channel kind {kind!r}")
    try:
        return builders[kind](**params)
    except TypeError as exc:
        raise InputError(f"bad parameters for {kind}: {exc}") from None


def requirement_cone(L, eps):
    """Decoding requirement over ``[L]``: union over ``m`` of the generator ``1{m' != m} - eps``."""
    L = int(L)
    if L < 1:
        raise InputError("L must be at least 1")
    if not 0.0 < eps < 1.0:
        raise InputError("eps must lie strictly between 0 and 1")
    gens = [np.where(np.arange(L) == m, 0.0, 1.0) - eps for m in range(L)]
    return C.from_generators(gens, L)


def dual_channel(T):
    return GameChannel(ConeKernel(T.inputs, [C.dual(c) for c in T.kernel.cones]), "explicit", {})


def n_use_cone(W, n, mode="all", xn=None, cap=N_USE_CAP):
    """Cone of ``n`` channel uses: ``W(x_1) |x ... |x W(x_n)``, unioned over ``x^n`` for ``mode='all'``."""
    n = int(n)
    if n < 1:
        raise InputError("n must be at least 1")
    if mode == "fixed":
        if xn is None or len(xn) != n:
            raise InputError("fixed mode needs an input sequence of length n")
        return C.semidirect_explicit([W.cone(x) for x in xn], cap)
    if mode != "all":
        raise InputError(f"unknown mode {mode!r}")
    nx = len(W.inputs)
    if float(nx) ** n > cap:
        raise ResourceError(f"{nx}^{n} input sequences exceed the cap {cap}")
    cells = []
    alphabet = None
    for xs in itertools.product(range(nx), repeat=n):
        cone = C.semidirect_explicit([W.cone(x) for x in xs], cap)
        alphabet = cone.alphabet
        cells.extend(cone.cells)
        if len(cells) > cap:
            raise ResourceError(f"n-use cone exceeds {cap} cells")
    return DCCone(alphabet, cells)


def typewriter_edges(size=5):
    """Edges ``x -> {x, x+1 mod size}``; confusability graph is the ``size``-cycle."""
    return [(str(x), str(y)) for x in range(size) for y in (x, (x + 1) % size)]


def cycle_neighborhood_edges(size=5):
    """Edges ``x -> {x-1, x, x+1 mod size}``."""
    return [(str(x), str((x + d) % size)) for x in range(size) for d in (-1, 0, 1)]
