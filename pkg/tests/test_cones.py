import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from dcgames.cones import (
    Alphabet, Cell, ConeKernel, DCCone, adversarial_cell, combine, contains_cone,
    contains_portfolio, degraded, degraded_witness, disjoint_sum, dual, empty, equals_cone,
    from_generators, full, halfspace, intersection, is_informative, lazy_membership,
    minimal_transversals, minplus, noiseless, nonpositive, primitive_cone, prune_cells,
    pushforward, robustify, semidirect_explicit, union,
)
from dcgames.errors import InputError, PreconditionError, ResourceError, UnsupportedRepresentation

from helpers import random_cone


# -- definitional oracles -----------------------------------------------------

def in_dual_oracle(A, t, tol=1e-7):
    """t in dual(A) iff no a in A has a(y) + t(y) > 0 for every y."""
    d = A.dim
    for c in A.cells:
        # maximize delta <= 1 s.t. a in cell, a(y) >= -t(y) + delta
        cvec = np.zeros(d + 1)
        cvec[-1] = -1.0
        A_ub = [np.append(p, 0.0) for p in c.normals]
        b_ub = [0.0] * len(A_ub)
        for y in range(d):
            row = np.zeros(d + 1)
            row[y] = -1.0
            row[-1] = 1.0
            A_ub.append(row)
            b_ub.append(t[y])
        res = linprog(cvec, A_ub=np.array(A_ub), b_ub=b_ub,
                      bounds=[(None, None)] * d + [(None, 1.0)], method="highs")
        if res.status == 0 and -res.fun > tol:
            return False
    return True


def generator_oracle(g, a):
    """a <= gamma * g for some gamma >= 0, by scanning the interval of admissible gammas."""
    lo, hi = 0.0, np.inf
    for gy, ay in zip(g, a):
        if gy > 0:
            lo = max(lo, ay / gy)
        elif gy < 0:
            hi = min(hi, ay / gy)
        elif ay > 1e-12:
            return False
    return lo <= hi + 1e-12


def coupling_max(p, q, s):
    """max over couplings of p and q of <pi, s>."""
    dY, dZ = len(p), len(q)
    A_eq, b_eq = [], []
    for y in range(dY):
        row = np.zeros(dY * dZ)
        row[y * dZ:(y + 1) * dZ] = 1
        A_eq.append(row)
        b_eq.append(p[y])
    for z in range(dZ):
        row = np.zeros(dY * dZ)
        row[z::dZ] = 1
        A_eq.append(row)
        b_eq.append(q[z])
    res = linprog(-np.asarray(s), A_eq=np.array(A_eq), b_eq=b_eq, bounds=[(0, None)] * (dY * dZ), method="highs")
    return -res.fun


# -- construction -------------------------------------------------------------

def test_alphabet_validation():
    with pytest.raises(InputError):
        Alphabet([])
    with pytest.raises(InputError):
        Alphabet(["a", "a"])
    assert Alphabet(3).symbols == ("0", "1", "2")


def test_halfspace_normalized():
    A = halfspace([2, 2])
    assert len(A.cells) == 1
    np.testing.assert_allclose(A.cells[0].normals, [[0.5, 0.5]])


@pytest.mark.parametrize("p", [[0, 0], [1, -1]])
def test_bad_halfspace(p):
    with pytest.raises(InputError):
        halfspace(p)


def test_primitive_shapes():
    assert full(3).cells[0].is_full
    assert empty(3).is_empty
    assert len(nonpositive(3).cells) == 1 and nonpositive(3).cells[0].normals.shape == (3, 3)
    assert len(noiseless(3).cells) == 3
    assert adversarial_cell([], 3).cells[0].is_full
    assert primitive_cone("halfspace", 2, [1, 3]).cells[0].normals[0][1] == pytest.approx(0.75)
    with pytest.raises(InputError):
        primitive_cone("nope", 2)


def test_adversarial_cell():
    A = adversarial_cell(["0", "1"], 3)
    np.testing.assert_allclose(A.cells[0].normals, [[0, 1, 0], [1, 0, 0]])
    assert contains_portfolio(A, [0, 0, 7])
    assert not contains_portfolio(A, [0.1, 0, 0])


def test_from_generators_fano_generator():
    eps = 0.1
    A = from_generators([[-eps, 1 - eps]])
    keys = sorted(tuple(np.round(n, 12)) for n in A.cells[0].normals)
    assert keys == [(0.9, 0.1), (1.0, 0.0)]


@pytest.mark.parametrize("seed", range(3))
def test_from_generators_against_gamma_search(seed):
    rng = np.random.default_rng(seed)
    for _ in range(5):
        d = int(rng.integers(2, 5))
        g = rng.normal(size=d)
        g[rng.random(d) < 0.2] = 0.0
        A = from_generators([g])
        pts = rng.normal(size=(2000, d)) * 2
        for a in pts:
            assert contains_portfolio(A, a, tol=1e-10) == generator_oracle(g, a)


def test_generator_positive_is_full_and_nonpositive():
    assert from_generators([[1.0, 2.0]]).cells[0].is_full
    assert equals_cone(from_generators([[-1.0, -2.0]]), nonpositive(2))


# -- membership ---------------------------------------------------------------

def bsc_feedback(beta):
    return union(halfspace([1 - beta, beta]), halfspace([beta, 1 - beta]))


def test_membership_examples():
    assert contains_portfolio(nonpositive(2), [-1, -2])
    A = bsc_feedback(0.25)
    assert contains_portfolio(A, [-1, 3])
    assert contains_portfolio(A, [3, -1])
    assert not contains_portfolio(A, [2, 2])
    assert not contains_portfolio(empty(2), [-1, -1])
    assert contains_portfolio(full(2), [5, 5])
    with pytest.raises(InputError):
        contains_portfolio(A, [1, 2, 3])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_scaling_and_downward_closure(seed):
    rng = np.random.default_rng(seed)
    A = random_cone(rng)
    for _ in range(20):
        s = rng.normal(size=A.dim)
        if contains_portfolio(A, s):
            assert contains_portfolio(A, rng.uniform(0, 10) * s)
            assert contains_portfolio(A, s - rng.exponential(size=A.dim))


# -- combination --------------------------------------------------------------

def test_union_intersection_examples():
    e0, e1 = halfspace([1, 0]), halfspace([0, 1])
    assert equals_cone(union(e0, e1), noiseless(2))
    assert equals_cone(intersection(e0, e1), nonpositive(2))
    with pytest.raises(InputError):
        union(e0, halfspace([1, 1, 1]))


def test_disjoint_sum_noiseless():
    A = disjoint_sum(noiseless(Alphabet(["0", "1"])), noiseless(Alphabet(["2"])))
    assert A.alphabet.symbols == ("0", "1", "2")
    assert equals_cone(A, noiseless(3))
    rng = np.random.default_rng(1)
    for s in rng.normal(size=(1000, 3)):
        assert contains_portfolio(A, s) == (np.min(s) <= 0)


def test_disjoint_sum_tags_clashes():
    A = disjoint_sum(halfspace([1, 1]), halfspace([1, 2]))
    assert A.alphabet.symbols == ("1:0", "1:1", "2:0", "2:1")


@pytest.mark.parametrize("seed", range(5))
def test_sum_channel_embedding(seed):
    rng = np.random.default_rng(seed)
    A = random_cone(rng, d=2)
    B = random_cone(rng, d=2)
    S = combine("disjoint_sum", A, B)
    for _ in range(200):
        a = rng.normal(size=2)
        s = np.concatenate([a, rng.uniform(10, 1000, size=2)])
        assert contains_portfolio(S, s) == contains_portfolio(A, a)


# -- transversals and duals ---------------------------------------------------

def brute_transversals(edges):
    verts = sorted(set().union(*edges)) if edges else []
    hits = [frozenset(c) for r in range(len(verts) + 1) for c in itertools.combinations(verts, r)
            if all(set(c) & e for e in edges)]
    return sorted((h for h in hits if not any(o < h for o in hits)), key=lambda t: (len(t), sorted(t)))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.frozensets(st.integers(0, 5), min_size=1, max_size=4), max_size=5))
def test_minimal_transversals_brute_force(edges):
    assert minimal_transversals(edges) == brute_transversals(edges)


def test_transversal_edge_cases():
    assert minimal_transversals([]) == [frozenset()]
    assert minimal_transversals([frozenset()]) == []


def test_dual_examples():
    assert equals_cone(dual(empty(2)), full(2))
    assert dual(full(2)).is_empty
    p = halfspace([0.6, 0.4])
    assert equals_cone(dual(p), p)
    assert equals_cone(dual(nonpositive(2)), noiseless(2))
    assert equals_cone(dual(noiseless(3)), nonpositive(3))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_dual_involution_and_de_morgan(seed):
    rng = np.random.default_rng(seed)
    A = random_cone(rng)
    B = random_cone(rng, d=A.dim)
    assert equals_cone(dual(dual(A)), A)
    assert equals_cone(dual(union(A, B)), intersection(dual(A), dual(B)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_dual_matches_definition(seed):
    rng = np.random.default_rng(seed)
    A = random_cone(rng, max_cells=2)
    D = dual(A)
    for t in rng.normal(size=(30, A.dim)):
        assert contains_portfolio(D, t, tol=1e-7) == in_dual_oracle(A, t)


def test_prune_keeps_union():
    rng = np.random.default_rng(4)
    for _ in range(10):
        A = random_cone(rng)
        P = prune_cells(A)
        assert equals_cone(P, A)
        assert len(P.cells) <= len(A.cells)
    A = union(halfspace([1, 1]), nonpositive(2))
    assert len(prune_cells(A).cells) == 1


# -- containment --------------------------------------------------------------

def test_containment_examples():
    assert contains_cone(noiseless(2), halfspace([1, 1]))[0]
    ok, w = contains_cone(halfspace([1, 1]), noiseless(2))
    assert not ok
    assert contains_portfolio(noiseless(2), w) and w.sum() > 0
    assert contains_cone(empty(2), empty(2))[0]
    assert not contains_cone(empty(2), nonpositive(2))[0]
    assert contains_cone(full(2), noiseless(2))[0]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_containment_witness_and_sampling(seed):
    rng = np.random.default_rng(seed)
    A = random_cone(rng)
    B = random_cone(rng, d=A.dim)
    assert contains_cone(A, A)[0]
    ok, w = contains_cone(A, B)
    if ok:
        for s in rng.normal(size=(200, A.dim)):
            if contains_portfolio(B, s, tol=0):
                assert contains_portfolio(A, s, tol=1e-8)
    else:
        assert contains_portfolio(B, w, tol=1e-8)
        assert not contains_portfolio(A, w, tol=1e-12)


# -- pushforward --------------------------------------------------------------

def test_pushforward_examples():
    A = halfspace([0.25, 0.25, 0.5])
    P = pushforward(A, {"0": "a", "1": "a", "2": "b"})
    assert P.alphabet.symbols == ("a", "b")
    assert equals_cone(P, halfspace([0.5, 0.5], ["a", "b"]))
    assert equals_cone(pushforward(A, lambda y: y), A)
    Z = pushforward(noiseless(2), lambda y: "z")
    assert Z.alphabet.symbols == ("z",)
    assert contains_portfolio(Z, [0]) and not contains_portfolio(Z, [0.1])
    with pytest.raises(InputError):
        pushforward(A, {"0": "a"})


@pytest.mark.parametrize("seed", range(5))
def test_pushforward_definitional(seed):
    rng = np.random.default_rng(seed)
    A = random_cone(rng, d=4)
    f = {str(y): str(int(rng.integers(2))) for y in range(4)}
    P = pushforward(A, f, target=["0", "1"])
    for b in rng.normal(size=(300, 2)):
        pulled = np.array([b[int(f[str(y)])] for y in range(4)])
        assert contains_portfolio(P, b) == contains_portfolio(A, pulled)


# -- min-plus -----------------------------------------------------------------

def minplus_oracle(A, B, lam, s):
    """s in A (+)_lam B iff some t has s + lam*t in A and s - (1-lam)*t in B.

    Per cell pair the admissible t form an interval, read off directly.
    """
    for c in A.cells:
        hi = np.min(-(c.normals @ s) / lam) if not c.is_full else np.inf
        for e in B.cells:
            lo = np.max((e.normals @ s) / (1 - lam)) if not e.is_full else -np.inf
            if lo <= hi + 1e-9:
                return True
    return False


def test_minplus_examples():
    e0, e1 = halfspace([1, 0]), halfspace([0, 1])
    assert equals_cone(minplus(e0, e1, 0.5), halfspace([1, 1]))
    assert equals_cone(minplus(e0, e1, 0.0), e0)
    assert equals_cone(minplus(e0, e1, 1.0), e1)
    assert minplus(e0, empty(2), 0.3).is_empty
    with pytest.raises(InputError):
        minplus(e0, e1, 1.5)


def test_robustify_equals_requirement_generators():
    R = robustify(noiseless(2), 0.1)
    G = from_generators([[-0.1, 0.9], [0.9, -0.1]])
    assert equals_cone(R, G)
    rng = np.random.default_rng(0)
    for s in rng.normal(size=(10000, 2)):
        # Eliminating t: s in R iff s + (eps/(1-eps)) * max(s) * 1 lies in the noiseless cone.
        shifted = s + (0.1 / 0.9) * max(np.max(s), 0.0)
        assert contains_portfolio(R, s, tol=1e-10) == (np.min(shifted) <= 1e-10 * max(1, np.max(np.abs(s))))


@pytest.mark.parametrize("seed", range(5))
def test_minplus_against_t_interval(seed):
    rng = np.random.default_rng(seed)
    A = random_cone(rng, max_cells=2)
    B = random_cone(rng, d=A.dim, max_cells=2)
    lam = float(rng.uniform(0.05, 0.95))
    M = minplus(A, B, lam)
    for s in rng.normal(size=(1000, A.dim)):
        assert contains_portfolio(M, s, tol=1e-12) == minplus_oracle(A, B, lam, s)


# -- products -----------------------------------------------------------------

def test_semidirect_halfspaces():
    p, q = np.array([0.3, 0.7]), np.array([0.2, 0.5, 0.3])
    S = semidirect_explicit([halfspace(p), halfspace(q)])
    assert len(S.cells) == 1
    np.testing.assert_allclose(S.cells[0].normals[0], np.outer(p, q).ravel())
    T = semidirect_explicit([halfspace(p)] * 3)
    np.testing.assert_allclose(T.cells[0].normals[0], np.einsum("i,j,k->ijk", p, p, p).ravel())


def test_semidirect_bsc_feedback_count_and_membership():
    A = bsc_feedback(0.25)
    S = semidirect_explicit([A, A])
    assert len(S.cells) == 8
    rng = np.random.default_rng(0)
    for s in rng.normal(size=(1000, 4)):
        assert contains_portfolio(S, s, tol=1e-9) == lazy_membership("semidirect", (A, A), s, tol=1e-9)


def test_semidirect_rejects_multi_normal():
    with pytest.raises(UnsupportedRepresentation):
        semidirect_explicit([nonpositive(2), halfspace([1, 1])])


def test_product_example_uses_coupling():
    p = q = np.array([0.5, 0.5])
    s = np.array([-1.0, 1.0, 1.0, -1.0])
    # The best coupling puts all mass off the diagonal: <pi, s> = 1 > 0, so s is outside.
    assert coupling_max(p, q, s) == pytest.approx(1.0)
    assert not lazy_membership("product", (halfspace(p), halfspace(q)), s)
    # ...whereas the semidirect product (a single product halfspace) does contain it.
    assert lazy_membership("semidirect", (halfspace(p), halfspace(q)), s)


@pytest.mark.parametrize("seed", range(4))
def test_product_against_coupling(seed):
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(3))
    for s in rng.normal(size=(50, 6)):
        expected = coupling_max(p, q, s) <= 1e-9
        assert lazy_membership("product", (halfspace(p), halfspace(q)), s) == expected


def test_minkowski_examples():
    args = (nonpositive(2), nonpositive(2))
    assert lazy_membership("minkowski_sum", args, [-1, -1])
    assert not lazy_membership("minkowski_sum", args, [0.1, -1])


def test_implication_self_is_nonpositive():
    A = bsc_feedback(0.25)
    assert lazy_membership("implication", (A, A), [-1, -1])
    assert not lazy_membership("implication", (A, A), [0.1, 0])


def test_implication_definition():
    # B \ A + R<=0 for A = e0 halfspace and B = full: anything below a point with b(0) > 0.
    A, B = halfspace([1, 0]), full(2)
    assert lazy_membership("implication", (A, B), [5, 5])
    A, B = noiseless(2), halfspace([1, 1])
    # halfspace is inside noiseless, so only nonpositive portfolios qualify.
    assert not lazy_membership("implication", (A, B), [1, -2])
    assert lazy_membership("implication", (A, B), [-1, -2])
    assert lazy_membership("implication", (empty(2), B), [1, -2])


def test_semidirect_selection_cap():
    A = noiseless(4)
    with pytest.raises(ResourceError):
        lazy_membership("semidirect", (A, A), np.zeros(16), cap=10)


# -- informativeness ----------------------------------------------------------

def test_informative_examples():
    assert not is_informative(halfspace([1, 2]))
    assert not is_informative(nonpositive(3))
    assert is_informative(bsc_feedback(0.25))
    assert is_informative(full(2))
    assert not is_informative(empty(2))
    assert is_informative(noiseless(2))


# -- degradedness -------------------------------------------------------------

def test_degraded_examples():
    A = bsc_feedback(0.25)
    assert degraded("deterministic", A, A)
    big = halfspace([0.25, 0.25, 0.5])
    small = halfspace([0.5, 0.5], ["a", "b"])
    assert degraded("deterministic", small, big)
    f = degraded_witness(small, big)
    assert f[0] == f[1] != f[2]


def test_nondeterministic_degradedness():
    A = halfspace([0.5, 0.5])
    F = ConeKernel(2, [halfspace([0.9, 0.1]), halfspace([0.1, 0.9])])
    # Composition of two channels: the output distribution is the mixture.
    assert degraded("nondeterministic_given_F", halfspace([0.5, 0.5]), A, F)
    assert not degraded("nondeterministic_given_F", halfspace([0.9, 0.1]), A, F)
    with pytest.raises(PreconditionError):
        degraded("nondeterministic_given_F", A, A, ConeKernel(2, [noiseless(2), halfspace([1, 1])]))
