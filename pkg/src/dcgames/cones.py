"""Pricing downward-closed cones over finite alphabets.

A cone is stored in H-form as a finite union of *cells*; a cell is the
intersection of halfspaces ``{a : <p, a> <= 0}`` whose normals ``p`` are
probability vectors.  A cell with no normals is the whole space and a cone
with no cells is the empty cone.  Every operation below works on this
representation directly, delegating strictness questions (containment,
informativeness) to small LPs.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InputError, PreconditionError, ResourceError, UnsupportedRepresentation
from .lp import OPTIMAL, LinearProgram, max_margin_feasibility, solve_lp

DEFAULT_TOL = 1e-9
TRANSVERSAL_CAP = 200_000
SELECTION_CAP = 200_000
FUNCTION_CAP = 2_000_000
KEY_DECIMALS = 12


class Alphabet:
    """An ordered list of distinct string labels."""

    __slots__ = ("symbols", "_index")

    def __init__(self, symbols):
        if isinstance(symbols, Alphabet):
            symbols = symbols.symbols
        elif isinstance(symbols, (int, np.integer)):
            symbols = range(int(symbols))
        labels = tuple(str(s) for s in symbols)
        if not labels:
            raise InputError("an alphabet needs at least one symbol")
        if len(set(labels)) != len(labels):
            raise InputError(f"duplicate labels in alphabet {labels}")
        self.symbols = labels
        self._index = {s: i for i, s in enumerate(labels)}

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        return f"Alphabet({list(self.symbols)})"

    def index(self, label):
        try:
            return self._index[str(label)]
        except KeyError:
            raise InputError(f"symbol {label!r} is not in {self!r}") from None

    def product(self, other, sep="."):
        return Alphabet(f"{a}{sep}{b}" for a in self.symbols for b in other.symbols)


def as_alphabet(alphabet):
    return alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)


def normalize(p):
    """Scale a nonnegative, nonzero weight vector to sum one."""
    p = np.asarray(p, dtype=float).ravel()
    if not np.all(np.isfinite(p)):
        raise InputError("normal weights must be finite")
    if np.any(p < 0):
        raise InputError(f"normal weights must be nonnegative, got {p}")
    total = p.sum()
    if total <= 0:
        raise InputError("normal weights must not all be zero")
    return p / total


def _key(p):
    return tuple(np.round(p, KEY_DECIMALS) + 0.0)


def indicator(size, i):
    e = np.zeros(size)
    e[i] = 1.0
    return e


class Cell:
    """Intersection of the halfspaces ``<p, a> <= 0`` over the stored normals."""

    __slots__ = ("normals", "keys")

    def __init__(self, normals, dim):
        rows, keys, seen = [], [], set()
        for p in normals:
            p = normalize(p)
            if p.size != dim:
                raise InputError(f"normal of length {p.size} in a cell over {dim} symbols")
            k = _key(p)
            if k not in seen:
                seen.add(k)
                rows.append(p)
                keys.append(k)
        order = sorted(range(len(keys)), key=lambda i: keys[i])
        arr = np.array([rows[i] for i in order], dtype=float).reshape(len(rows), dim)
        arr.setflags(write=False)
        self.normals = arr
        self.keys = frozenset(keys)

    @property
    def dim(self):
        return self.normals.shape[1]

    @property
    def is_full(self):
        return self.normals.shape[0] == 0

    def contains(self, s, tol=DEFAULT_TOL):
        if self.is_full:
            return True
        scale = max(1.0, float(np.max(np.abs(s))))
        return bool(np.max(self.normals @ s) <= tol * scale)

    def __eq__(self, other):
        return isinstance(other, Cell) and self.keys == other.keys and self.dim == other.dim

    def __hash__(self):
        return hash(self.keys)

    def __repr__(self):
        return f"Cell({self.normals.tolist()})"


class DCCone:
    """A pricing DC cone: the union of ``cells`` over ``alphabet``."""

    def __init__(self, alphabet, cells=()):
        self.alphabet = as_alphabet(alphabet)
        d = len(self.alphabet)
        built, seen = [], set()
        for c in cells:
            if not isinstance(c, Cell):
                c = Cell(c, d)
            elif c.dim != d:
                raise InputError("cell dimension does not match the alphabet")
            if c.keys not in seen:
                seen.add(c.keys)
                built.append(c)
        self.cells = tuple(built)
        self._transversals = None

    @property
    def dim(self):
        return len(self.alphabet)

    @property
    def is_empty(self):
        return not self.cells

    @property
    def has_full_cell(self):
        return any(c.is_full for c in self.cells)

    def __len__(self):
        return len(self.cells)

    def __repr__(self):
        return f"DCCone({list(self.alphabet.symbols)}, {len(self.cells)} cells)"

    def normal_pool(self):
        """Distinct normals across all cells, keyed by their rounded values."""
        pool = {}
        for c in self.cells:
            for k, p in zip(sorted(c.keys), c.normals):
                pool.setdefault(k, p)
        return pool

    def transversals(self):
        """Minimal sets of normal keys meeting every cell (cached)."""
        if self._transversals is None:
            self._transversals = minimal_transversals([c.keys for c in self.cells])
        return self._transversals


def minimal_transversals(edges, cap=TRANSVERSAL_CAP):
    """Minimal hitting sets of a family of finite sets (Berge's algorithm).

    An empty family has the single transversal ``frozenset()``; a family
    containing an empty set has none.
    """
    edges = sorted({frozenset(e) for e in edges}, key=lambda e: (len(e), sorted(e)))
    # Supersets of other edges never change the transversals.
    minimal_edges = [e for e in edges if not any(f < e for f in edges)]
    current = [frozenset()]
    for edge in minimal_edges:
        if not edge:
            return []
        hit = [t for t in current if t & edge]
        missed = [t for t in current if not (t & edge)]
        grown = set(hit)
        for t in missed:
            for v in sorted(edge):
                grown.add(t | {v})
        if len(grown) > cap:
            raise ResourceError(f"transversal enumeration exceeded {cap} sets")
        by_size = sorted(grown, key=len)
        kept = []
        for t in by_size:
            if not any(k <= t for k in kept):
                kept.append(t)
        current = kept
    return sorted(current, key=lambda t: (len(t), sorted(t)))


# ---------------------------------------------------------------------------
# Construction


def full(alphabet):
    return DCCone(alphabet, [Cell([], len(as_alphabet(alphabet)))])


def empty(alphabet):
    return DCCone(alphabet, [])


def halfspace(p, alphabet=None):
    p = normalize(p)
    alphabet = as_alphabet(alphabet if alphabet is not None else p.size)
    if p.size != len(alphabet):
        raise InputError("halfspace normal length does not match the alphabet")
    return DCCone(alphabet, [[p]])


def nonpositive(alphabet):
    alphabet = as_alphabet(alphabet)
    d = len(alphabet)
    return DCCone(alphabet, [[indicator(d, i) for i in range(d)]])


def noiseless(alphabet):
    alphabet = as_alphabet(alphabet)
    d = len(alphabet)
    return DCCone(alphabet, [[indicator(d, i)] for i in range(d)])


def adversarial_cell(support, alphabet):
    """One cell forcing ``a(y) <= 0`` on every symbol in ``support``."""
    alphabet = as_alphabet(alphabet)
    d = len(alphabet)
    idx = sorted({alphabet.index(y) for y in support})
    return DCCone(alphabet, [[indicator(d, i) for i in idx]])


def generator_cell(g):
    """Normals of the cell ``{a : a <= gamma * g for some gamma >= 0}``."""
    g = np.asarray(g, dtype=float).ravel()
    if not np.all(np.isfinite(g)):
        raise InputError("generator entries must be finite")
    d = g.size
    normals = [indicator(d, y) for y in np.flatnonzero(g == 0)]
    neg = np.flatnonzero(g < 0)
    pos = np.flatnonzero(g > 0)
    for ym in neg:
        normals.append(indicator(d, ym))
        for yp in pos:
            n = np.zeros(d)
            n[ym] = g[yp]
            n[yp] = -g[ym]
            normals.append(n)
    return normals


def from_generators(generators, alphabet=None):
    """Union over ``g`` of the single-generator cones ``{a <= gamma g}``."""
    generators = [np.asarray(g, dtype=float).ravel() for g in generators]
    if alphabet is None:
        if not generators:
            raise InputError("an alphabet is required when no generators are given")
        alphabet = generators[0].size
    alphabet = as_alphabet(alphabet)
    for g in generators:
        if g.size != len(alphabet):
            raise InputError("generator length does not match the alphabet")
    return DCCone(alphabet, [generator_cell(g) for g in generators])


def primitive_cone(kind, alphabet, arg=None):
    """Dispatch by name to the primitive constructors."""
    if kind == "halfspace":
        return halfspace(arg, alphabet)
    if kind == "full":
        return full(alphabet)
    if kind == "empty":
        return empty(alphabet)
    if kind == "nonpositive":
        return nonpositive(alphabet)
    if kind == "noiseless":
        return noiseless(alphabet)
    if kind == "from_generators":
        return from_generators(arg, alphabet)
    if kind == "adversarial_cell":
        return adversarial_cell(arg, alphabet)
    raise InputError(f"unknown primitive cone kind {kind!r}")


def as_portfolio(alphabet, s):
    """Payoff vector indexed by ``alphabet``, from a sequence or a label map."""
    alphabet = as_alphabet(alphabet)
    if isinstance(s, dict):
        v = np.zeros(len(alphabet))
        for k, val in s.items():
            v[alphabet.index(k)] = float(val)
    else:
        v = np.asarray(s, dtype=float).ravel()
    if v.size != len(alphabet):
        raise InputError(f"portfolio has {v.size} entries, alphabet has {len(alphabet)}")
    if not np.all(np.isfinite(v)):
        raise InputError("portfolio entries must be finite")
    return v


# ---------------------------------------------------------------------------
# Membership and combination


def contains_portfolio(A, s, tol=DEFAULT_TOL):
    s = as_portfolio(A.alphabet, s)
    return any(c.contains(s, tol) for c in A.cells)


def _same_alphabet(A, B):
    if A.alphabet != B.alphabet:
        raise InputError(f"alphabet mismatch: {A.alphabet!r} vs {B.alphabet!r}")


def union(A, B):
    _same_alphabet(A, B)
    return DCCone(A.alphabet, A.cells + B.cells)


def intersection(A, B):
    _same_alphabet(A, B)
    cells = [list(c.normals) + list(e.normals) for c in A.cells for e in B.cells]
    return DCCone(A.alphabet, cells)


def disjoint_sum(A, B):
    """Sum cone over the concatenated alphabet; clashing labels get ``1:``/``2:`` tags."""
    left, right = A.alphabet.symbols, B.alphabet.symbols
    if set(left) & set(right):
        left = tuple(f"1:{y}" for y in left)
        right = tuple(f"2:{z}" for z in right)
    alphabet = Alphabet(left + right)
    dA, dB = A.dim, B.dim
    cells = [[np.concatenate([p, np.zeros(dB)]) for p in c.normals] for c in A.cells]
    cells += [[np.concatenate([np.zeros(dA), q]) for q in c.normals] for c in B.cells]
    return DCCone(alphabet, cells)


def combine(kind, A, B):
    if kind == "union":
        return union(A, B)
    if kind == "intersection":
        return intersection(A, B)
    if kind == "disjoint_sum":
        return disjoint_sum(A, B)
    raise InputError(f"unknown combination {kind!r}")


def dual(A, prune=False, tol=DEFAULT_TOL):
    """The dual cone, one output cell per minimal transversal of the input cells."""
    pool = A.normal_pool()
    cells = [[pool[k] for k in sorted(t)] for t in A.transversals()]
    out = DCCone(A.alphabet, cells)
    return prune_cells(out, tol) if prune else out


def prune_cells(A, tol=DEFAULT_TOL):
    """Drop cells contained in another cell; the union is unchanged."""
    cells = list(A.cells)
    keep = []
    for i, c in enumerate(cells):
        dominated = False
        for j, e in enumerate(cells):
            if i == j:
                continue
            if _cell_subset(c, e, tol) and (not _cell_subset(e, c, tol) or j < i):
                dominated = True
                break
        if not dominated:
            keep.append(c)
    return DCCone(A.alphabet, keep)


def _cell_subset(C, E, tol):
    """Whether cell ``C`` lies inside cell ``E``."""
    if E.keys <= C.keys:
        return True
    if C.is_full:
        return E.is_full
    for q in E.normals:
        if _key(q) in C.keys:
            continue
        margin, _ = max_margin_feasibility(C.normals, [q], C.dim, tol)
        if margin > tol:
            return False
    return True


def pushforward(A, f, target=None):
    """Relabel outcomes through ``f``; mass of ``y`` moves to ``f(y)``.

    ``f`` is a mapping or callable on source labels.  ``target`` fixes the
    output alphabet; by default it lists the images in order of appearance.
    """
    src = A.alphabet.symbols
    try:
        images = [str(f[y]) if not callable(f) else str(f(y)) for y in src]
    except KeyError as exc:
        raise InputError(f"map is undefined on symbol {exc.args[0]!r}") from None
    if target is None:
        target = list(dict.fromkeys(images))
    target = as_alphabet(target)
    M = np.zeros((len(src), len(target)))
    for i, z in enumerate(images):
        M[i, target.index(z)] = 1.0
    return DCCone(target, [[p @ M for p in c.normals] for c in A.cells])


def pushforward_matrix(A, M, target):
    """Pushforward by an explicit 0/1 assignment matrix (rows source, columns target)."""
    return DCCone(target, [[p @ M for p in c.normals] for c in A.cells])


def minplus(A, B, lam):
    """The min-plus mixture ``A (+)_lam B``."""
    _same_alphabet(A, B)
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise InputError(f"mixing weight must lie in [0, 1], got {lam}")
    if A.is_empty or B.is_empty:
        return empty(A.alphabet)
    if lam == 0.0:
        return DCCone(A.alphabet, A.cells)
    if lam == 1.0:
        return DCCone(B.alphabet, B.cells)
    cells = []
    for c in A.cells:
        for e in B.cells:
            cells.append([(1 - lam) * p + lam * q for p in c.normals for q in e.normals])
    return DCCone(A.alphabet, cells)


def robustify(A, eps):
    return minplus(A, nonpositive(A.alphabet), eps)


# ---------------------------------------------------------------------------
# Containment


def contains_cone(A, B, tol=DEFAULT_TOL):
    """Decide ``B <= A``.  Returns ``(True, None)`` or ``(False, witness)``.

    The witness is a portfolio of ``B`` lying strictly outside every cell
    of ``A``.
    """
    _same_alphabet(A, B)
    d = A.dim
    if B.is_empty or A.has_full_cell:
        return True, None
    if A.is_empty:
        return False, np.zeros(d)
    pool = A.normal_pool()
    trans = A.transversals()
    for C in B.cells:
        if any(E.keys <= C.keys for E in A.cells):
            continue
        for T in trans:
            if T & C.keys:
                continue
            margin, a = max_margin_feasibility(C.normals, [pool[k] for k in sorted(T)], d, tol)
            if margin > tol:
                return False, a
    return True, None


def equals_cone(A, B, tol=DEFAULT_TOL):
    return contains_cone(A, B, tol)[0] and contains_cone(B, A, tol)[0]


# ---------------------------------------------------------------------------
# Products


class ConeKernel:
    """A map from input symbols to cones over one shared output alphabet."""

    def __init__(self, inputs, cones):
        self.inputs = as_alphabet(inputs)
        if isinstance(cones, dict):
            cones = [cones[x] for x in self.inputs.symbols] if all(
                x in cones for x in self.inputs.symbols) else None
            if cones is None:
                raise InputError("kernel must map every input symbol")
        cones = list(cones)
        if len(cones) != len(self.inputs):
            raise InputError("kernel must map every input symbol")
        out = cones[0].alphabet
        if any(c.alphabet != out for c in cones):
            raise InputError("all cones of a kernel must share an output alphabet")
        self.cones = tuple(cones)
        self.outputs = out

    def __getitem__(self, x):
        if isinstance(x, (int, np.integer)):
            return self.cones[int(x)]
        return self.cones[self.inputs.index(x)]

    def __len__(self):
        return len(self.cones)


def _single_normals(A, what):
    out = []
    for c in A.cells:
        if c.normals.shape[0] != 1:
            raise UnsupportedRepresentation(
                f"{what} has a cell with {c.normals.shape[0]} normals; explicit products "
                "need single-normal cells (use lazy_membership instead)")
        out.append(c.normals[0])
    return out


def semidirect_pair(A, F, cap=SELECTION_CAP):
    """Explicit ``A |x F`` for single-normal cells; ``F`` is a cone or a kernel on ``A``'s alphabet."""
    if isinstance(F, DCCone):
        F = ConeKernel(A.alphabet, [F] * A.dim)
    if F.inputs != A.alphabet:
        raise InputError("kernel inputs must equal the first factor's alphabet")
    P = _single_normals(A, "first factor")
    Q = [_single_normals(c, "second factor") for c in F.cones]
    dZ = len(F.outputs)
    count = len(P) * int(np.prod([len(q) for q in Q], dtype=float))
    if count > cap:
        raise ResourceError(f"explicit product would have {count} cells (cap {cap})")
    cells, seen = [], set()
    for p in P:
        support = [y for y in range(A.dim) if p[y] > 0]
        # Choices on zero-mass symbols do not change the normal.
        choice_sets = [range(len(Q[y])) if p[y] > 0 else range(min(1, len(Q[y]))) for y in range(A.dim)]
        for sigma in itertools.product(*choice_sets):
            n = np.zeros(A.dim * dZ)
            for y in support:
                n[y * dZ:(y + 1) * dZ] = p[y] * Q[y][sigma[y]]
            k = _key(n / n.sum())
            if k not in seen:
                seen.add(k)
                cells.append([n])
    return DCCone(A.alphabet.product(F.outputs), cells)


def semidirect_explicit(cones, cap=SELECTION_CAP):
    """Left-associated explicit semidirect product of single-normal-cell cones."""
    cones = list(cones)
    if not cones:
        raise InputError("need at least one factor")
    out = cones[0]
    _single_normals(out, "first factor")
    for B in cones[1:]:
        out = semidirect_pair(out, B, cap)
    return out


def _feasible(objective_size, cons, bounds=None, tol=DEFAULT_TOL):
    lp = LinearProgram(np.zeros(objective_size), cons, bounds, "max")
    return solve_lp(lp, tol=tol).status == OPTIMAL


def _slack(tol, s):
    return tol * max(1.0, float(np.max(np.abs(s))))


def _product_member(C, Ds, s, dY, dZ, tol):
    """LP: s(y,z) <= a(y) + b_y(z), a in C, b_y in Ds[y] (one cell per y, or shared)."""
    shared = len(Ds) == 1
    nb = dZ if shared else dY * dZ
    n = dY + nb
    eps = _slack(tol, s)
    cons = []
    for y in range(dY):
        for z in range(dZ):
            row = np.zeros(n)
            row[y] = 1.0
            row[dY + (z if shared else y * dZ + z)] = 1.0
            cons.append((row, ">=", s[y * dZ + z]))
    for p in C.normals:
        cons.append((np.concatenate([p, np.zeros(nb)]), "<=", eps))
    for y, D in enumerate(Ds):
        for q in D.normals:
            row = np.zeros(n)
            off = dY if shared else dY + y * dZ
            row[off:off + dZ] = q
            cons.append((row, "<=", eps))
    return _feasible(n, cons, tol=tol)


def lazy_membership(kind, args, s, tol=DEFAULT_TOL, cap=SELECTION_CAP):
    """Membership of ``s`` in a composite cone without building its cells.

    ``kind`` and ``args``:

    * ``"product"``: ``(A, B)``, ``s`` indexed by ``(y, z)`` row-major.
    * ``"semidirect"``: ``(A, F)`` with ``F`` a cone or a :class:`ConeKernel`.
    * ``"minkowski_sum"``: ``(A, B)`` on one alphabet.
    * ``"implication"``: ``(A, B)`` on one alphabet.
    """
    s = np.asarray(s, dtype=float).ravel()
    if kind in ("product", "semidirect"):
        A, F = args
        if isinstance(F, DCCone):
            F = ConeKernel(A.alphabet, [F] * A.dim)
        dY, dZ = A.dim, len(F.outputs)
        if s.size != dY * dZ:
            raise InputError("portfolio length does not match the product alphabet")
        if kind == "product":
            cone_b = F.cones[0]
            if any(c is not cone_b for c in F.cones):
                raise InputError("product needs a cone, not a kernel, as second factor")
            return any(_product_member(C, [D], s, dY, dZ, tol)
                       for C in A.cells for D in cone_b.cells)
        counts = [len(c.cells) for c in F.cones]
        total = len(A.cells) * float(np.prod(counts, dtype=float))
        if total > cap:
            raise ResourceError(f"semidirect membership needs {int(total)} selections (cap {cap})")
        for C in A.cells:
            for sigma in itertools.product(*[c.cells for c in F.cones]):
                if _product_member(C, list(sigma), s, dY, dZ, tol):
                    return True
        return False
    if kind == "minkowski_sum":
        A, B = args
        _same_alphabet(A, B)
        d = A.dim
        s = as_portfolio(A.alphabet, s)
        eps = _slack(tol, s)
        for C in A.cells:
            for D in B.cells:
                cons = [(np.concatenate([indicator(d, y), indicator(d, y)]), ">=", s[y]) for y in range(d)]
                cons += [(np.concatenate([p, np.zeros(d)]), "<=", eps) for p in C.normals]
                cons += [(np.concatenate([np.zeros(d), q]), "<=", eps) for q in D.normals]
                if _feasible(2 * d, cons, tol=tol):
                    return True
        return False
    if kind == "implication":
        A, B = args
        _same_alphabet(A, B)
        return _implication_member(A, B, as_portfolio(A.alphabet, s), tol)
    raise InputError(f"unknown composite kind {kind!r}")


def _implication_member(A, B, s, tol):
    """``s`` in ``A -> B``: ``s <= 0``, or some ``b >= s`` in ``B`` lies strictly outside ``A``."""
    d = A.dim
    if np.max(s) <= _slack(tol, s):
        return True
    if A.has_full_cell:
        return False
    pool = A.normal_pool()
    trans = A.transversals()
    eps = _slack(tol, s)
    for D in B.cells:
        for T in trans:
            if T & D.keys:
                continue
            # Variables (b, delta): maximize delta <= 1 with b >= s, b in D, <q, b> >= delta on T.
            obj = np.zeros(d + 1)
            obj[d] = 1.0
            cons = [(indicator(d + 1, y), ">=", s[y]) for y in range(d)]
            cons += [(np.append(p, 0.0), "<=", eps) for p in D.normals]
            cons += [(np.append(pool[k], -1.0), ">=", 0.0) for k in sorted(T)]
            bounds = [(None, None)] * d + [(None, 1.0)]
            if not T:
                # A is empty, so any b in D above s will do.
                res = solve_lp(LinearProgram(np.zeros(d + 1), cons, bounds, "max"), tol=tol)
                if res.status == OPTIMAL:
                    return True
                continue
            res = solve_lp(LinearProgram(obj, cons, bounds, "max"), tol=tol)
            if res.status == OPTIMAL and res.value > tol:
                return True
    return False


# ---------------------------------------------------------------------------
# Informativeness and degradedness


def is_informative(A, tol=DEFAULT_TOL):
    """Whether the convex hull of ``A`` is the whole space.

    Equivalently, whether no single probability vector ``q`` lies in the
    conic hull of every cell's normals.  The empty cone is reported as not
    informative.
    """
    if A.is_empty:
        return False
    if A.has_full_cell:
        return True
    d = A.dim
    sizes = [c.normals.shape[0] for c in A.cells]
    n = d + sum(sizes)
    cons = [(np.concatenate([np.ones(d), np.zeros(n - d)]), "==", 1.0)]
    offset = d
    for c, k in zip(A.cells, sizes):
        for y in range(d):
            row = np.zeros(n)
            row[y] = 1.0
            row[offset:offset + k] = -c.normals[:, y]
            cons.append((row, "==", 0.0))
        offset += k
    return not _feasible(n, cons, [(0.0, None)] * n, tol)


def common_hull_point(A, tol=DEFAULT_TOL):
    """A probability vector in the conic hull of every cell, or ``None``."""
    if A.is_empty or A.has_full_cell:
        return None
    d = A.dim
    sizes = [c.normals.shape[0] for c in A.cells]
    n = d + sum(sizes)
    cons = [(np.concatenate([np.ones(d), np.zeros(n - d)]), "==", 1.0)]
    offset = d
    for c, k in zip(A.cells, sizes):
        for y in range(d):
            row = np.zeros(n)
            row[y] = 1.0
            row[offset:offset + k] = -c.normals[:, y]
            cons.append((row, "==", 0.0))
        offset += k
    res = solve_lp(LinearProgram(np.zeros(n), cons, [(0.0, None)] * n, "max"), tol=tol)
    return res.x[:d] if res.status == OPTIMAL else None


def _assignment_matrix(f, dY, dZ):
    M = np.zeros((dY, dZ))
    M[np.arange(dY), f] = 1.0
    return M


def _as_pairs(B, A):
    """Normalize cone-or-channel arguments into matched lists of cones."""
    if isinstance(A, DCCone) and isinstance(B, DCCone):
        return [B], [A]
    if hasattr(A, "kernel") and hasattr(B, "kernel"):
        if A.kernel.inputs != B.kernel.inputs:
            raise InputError("channels must share an input alphabet")
        return list(B.kernel.cones), list(A.kernel.cones)
    raise InputError("degradedness compares two cones or two channels")


def degraded_witness(B, A, cap=FUNCTION_CAP, tol=DEFAULT_TOL):
    """Some map ``f`` (as a tuple of target indices) with ``B <= f#A``, or ``None``."""
    Bs, As = _as_pairs(B, A)
    dY, dZ = As[0].dim, Bs[0].dim
    if float(dZ) ** dY > cap:
        raise ResourceError(f"{dZ}^{dY} maps exceed the enumeration cap {cap}")
    target = Bs[0].alphabet
    for f in itertools.product(range(dZ), repeat=dY):
        M = _assignment_matrix(list(f), dY, dZ)
        if all(contains_cone(pushforward_matrix(a, M, target), b, tol)[0] for a, b in zip(As, Bs)):
            return f
    return None


def degraded(kind, B, A, F=None, cap=FUNCTION_CAP, tol=DEFAULT_TOL):
    """Whether ``B`` is a degraded version of ``A``.

    ``deterministic``: some relabeling ``f`` gives ``B <= f#A``.
    ``nondeterministic_given_F``: every ``F(y)`` is non-informative and
    ``B`` lies in the second-coordinate image of ``A |x F``.
    """
    if kind == "deterministic":
        return degraded_witness(B, A, cap, tol) is not None
    if kind != "nondeterministic_given_F":
        raise InputError(f"unknown degradedness kind {kind!r}")
    if F is None:
        raise InputError("nondeterministic degradedness needs the kernel F")
    for y, cone in zip(F.inputs.symbols, F.cones):
        if is_informative(cone, tol):
            raise PreconditionError(f"F({y}) is informative")
    Bs, As = _as_pairs(B, A)
    dZ = len(F.outputs)
    for a, b in zip(As, Bs):
        prod = semidirect_pair(a, F)
        M = np.tile(np.eye(dZ), (a.dim, 1))
        image = pushforward_matrix(prod, M, F.outputs)
        if not contains_cone(image, b, tol)[0]:
            return False
    return True
