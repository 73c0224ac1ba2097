import itertools

import numpy as np
import pytest

from dcgames import channels as ch
from dcgames.capacity import info_capacity
from dcgames.cones import (
    DCCone, adversarial_cell, contains_cone, contains_portfolio, dual, equals_cone, halfspace,
    indicator, intersection, lazy_membership, noiseless, nonpositive, robustify, union,
)
from dcgames.errors import InputError, ResourceError, UnsupportedRepresentation


def hb(x):
    return -x * np.log2(x) - (1 - x) * np.log2(1 - x)


def eq41(beta):
    """The two-policy BSC(beta) insurance cone with feedback."""
    return DCCone(2, [[[1 - beta, beta]], [[beta, 1 - beta]]])


# -- kernels ------------------------------------------------------------------

def test_kernel_validation():
    with pytest.raises(InputError):
        ch.DMCKernel([[0.5, 0.6]])
    with pytest.raises(InputError):
        ch.DMCKernel([[1.5, -0.5]])
    with pytest.raises(InputError):
        ch.AVCFKernel(np.ones((2, 2)))
    with pytest.raises(InputError):
        ch.BipartiteGraph([("0", "0")], ["0", "1"], ["0"])
    with pytest.raises(InputError):
        ch.bsc(1.5)
    with pytest.raises(InputError):
        ch.build_channel("bsc", gamma=0.1)
    with pytest.raises(InputError):
        ch.build_channel("teleport")


def test_dmc_cones_are_row_halfspaces():
    rows = [[0.7, 0.2, 0.1], [0.1, 0.1, 0.8]]
    W = ch.dmc(rows)
    assert len(W.inputs) == 2 and len(W.outputs) == 3
    for x, r in enumerate(rows):
        assert equals_cone(W.cone(x), halfspace(r))
    assert equals_cone(W.range_cone(), union(halfspace(rows[0]), halfspace(rows[1])))


@pytest.mark.parametrize("beta", [0.05, 0.11, 0.25])
def test_bsc_feedback_is_two_policy_cone(beta):
    W = ch.bsc(beta, feedback=True)
    assert len(W.inputs) == 1
    assert equals_cone(W.cone("0"), eq41(beta))
    assert equals_cone(ch.build_channel("bsc", beta=beta, feedback=True).cone(0), eq41(beta))


@pytest.mark.parametrize("beta", [0.05, 0.11, 0.25])
def test_feedback_and_range_capacity_agree(beta):
    fb = info_capacity(ch.bsc(beta, feedback=True).cone(0), "minimax").value
    nf = info_capacity(ch.bsc(beta).range_cone(), "blahut_arimoto").value
    assert abs(fb - (1 - hb(beta))) < 1e-3
    assert abs(nf - (1 - hb(beta))) < 1e-3


def test_erasure_generator_cell():
    p = 0.1
    W = ch.erasure(p)
    cone = W.cone(0)
    assert list(W.outputs) == ["delivered", "lost"]
    # Buying gamma >= 0 of the policy: lose gamma on delivery, collect gamma(1/p - 1) on loss.
    for gamma in (0.0, 0.5, 3.0):
        assert contains_portfolio(cone, gamma * ch.erasure_generator(p))
    # The implied probability halfspace contains the cone ...
    implied = halfspace([1 - p, p], W.outputs)
    assert contains_cone(implied, cone)[0]
    assert equals_cone(cone, DCCone(W.outputs, [[[1 - p, p], [1, 0]]]))
    # ... but selling insurance (negative gamma) is not offered.
    assert not contains_portfolio(cone, -1.0 * ch.erasure_generator(p))
    assert contains_portfolio(implied, -1.0 * ch.erasure_generator(p))
    with pytest.raises(InputError):
        ch.erasure(1.0)


def test_erasure_range_cone_is_uninformative():
    # A single input that insures delivery carries no information on its own.
    p = 0.3
    W = ch.erasure(p)
    assert info_capacity(W.range_cone(), "minimax").value == pytest.approx(0.0, abs=1e-6)


def test_adversarial_cells():
    edges = ch.typewriter_edges(5)
    W = ch.adversarial(edges, [str(i) for i in range(5)], [str(i) for i in range(5)])
    for x in range(5):
        assert equals_cone(W.cone(str(x)), adversarial_cell([str(x), str((x + 1) % 5)], W.outputs))


def test_adversarial_feedback_neighbourhood_shape():
    sym = [str(i) for i in range(5)]
    W = ch.adversarial_feedback(ch.cycle_neighborhood_edges(5), sym, sym)
    expected = DCCone(5, [[indicator(5, (x + d) % 5) for d in (-1, 0, 1)] for x in range(5)])
    assert equals_cone(W.cone("0"), expected)
    assert len(W.cone("0").cells) == 5


def test_avcf_shape():
    # Encoder picks z (union), adversary picks v (intersection).
    p = np.zeros((1, 2, 2, 2))
    p[0, 0, 0] = [0.9, 0.1]
    p[0, 0, 1] = [0.7, 0.3]
    p[0, 1, 0] = [0.1, 0.9]
    p[0, 1, 1] = [0.3, 0.7]
    W = ch.avcf(p)
    expected = union(intersection(halfspace([0.9, 0.1]), halfspace([0.7, 0.3])),
                     intersection(halfspace([0.1, 0.9]), halfspace([0.3, 0.7])))
    assert equals_cone(W.cone(0), expected)
    # The DMC is the |Z| = |V| = 1 case.
    K = ch.DMCKernel([[0.8, 0.2], [0.2, 0.8]]).as_avcf()
    assert equals_cone(ch.avcf(K.p).cone(1), ch.dmc([[0.8, 0.2], [0.2, 0.8]]).cone(1))


# -- requirement cone ---------------------------------------------------------

def test_requirement_cone_example():
    A = ch.requirement_cone(2, 0.1)
    expected = DCCone(2, [[[1, 0], [0.9, 0.1]], [[0, 1], [0.1, 0.9]]])
    assert equals_cone(A, expected)


@pytest.mark.parametrize("L,eps", [(2, 0.1), (3, 0.2), (4, 0.1), (3, 0.6)])
def test_requirement_cone_is_robustified_noiseless(L, eps):
    assert equals_cone(ch.requirement_cone(L, eps), robustify(noiseless(L), eps))


def test_requirement_cone_edge_cases():
    assert equals_cone(ch.requirement_cone(1, 0.3), nonpositive(1))
    assert info_capacity(ch.requirement_cone(2, 0.5)).value == pytest.approx(0.0, abs=1e-3)
    for bad in ((0, 0.1), (2, 0.0), (2, 1.0)):
        with pytest.raises(InputError):
            ch.requirement_cone(*bad)


def test_requirement_cone_shrinks_as_eps_grows():
    # A looser requirement is a smaller cone: g_m = 1{m' != m} - eps decreases in eps.
    epsilons = [0.05, 0.1, 0.3, 0.5]
    for L in (2, 3):
        for e1, e2 in itertools.combinations(epsilons, 2):
            assert contains_cone(ch.requirement_cone(L, e1), ch.requirement_cone(L, e2))[0]
            assert not contains_cone(ch.requirement_cone(L, e2), ch.requirement_cone(L, e1))[0]
    a = np.array([-1.0, 5.0])
    assert contains_portfolio(ch.requirement_cone(2, 0.1), a)
    assert not contains_portfolio(ch.requirement_cone(2, 0.3), a)


# -- duals --------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(10))
def test_encoder_and_adversary_state_are_dual(seed):
    rng = np.random.default_rng(seed)
    d, s = int(rng.integers(2, 5)), int(rng.integers(1, 4))
    P = rng.dirichlet(np.ones(d), size=s)
    encoder = DCCone(d, [[p] for p in P])
    adversary = DCCone(d, [list(P)])
    assert equals_cone(dual(encoder), adversary)
    assert equals_cone(dual(adversary), encoder)


def _covering_reference(graph):
    """Minimal covering sets by brute force over subsets of outputs."""
    nx, ny = len(graph.inputs), len(graph.outputs)
    covers = []
    for r in range(1, ny + 1):
        for S in itertools.combinations(range(ny), r):
            if all(any(y in S for y in nb) for nb in graph.neighbors):
                if not any(set(T) <= set(S) for T in covers):
                    covers.append(S)
    return DCCone(ny, [[indicator(ny, y) for y in S] for S in covers])


@pytest.mark.parametrize("edges,nx,ny", [
    ([("0", "0"), ("0", "1"), ("1", "1"), ("1", "2"), ("2", "2")], 3, 3),
    ([("0", "0"), ("1", "0"), ("1", "1"), ("2", "2"), ("2", "1")], 3, 3),
    (ch.typewriter_edges(5), 5, 5),
    (ch.cycle_neighborhood_edges(5), 5, 5),
])
def test_dual_of_adversarial_feedback_is_covering_channel(edges, nx, ny):
    xs, ys = [str(i) for i in range(nx)], [str(i) for i in range(ny)]
    W = ch.adversarial_feedback(edges, xs, ys)
    D = ch.dual_channel(W)
    C = ch.covering_channel(edges, xs, ys)
    assert equals_cone(D.cone(0), C.cone(0))
    assert equals_cone(D.cone(0), _covering_reference(ch.BipartiteGraph(edges, xs, ys)))


def test_dual_channel_involution():
    rng = np.random.default_rng(7)
    rows = rng.dirichlet(np.ones(3), size=3)
    for W in (ch.dmc(rows), ch.dmc_feedback(rows),
              ch.adversarial(ch.typewriter_edges(5), list("01234"), list("01234"))):
        back = ch.dual_channel(ch.dual_channel(W))
        for x in W.inputs:
            assert equals_cone(back.cone(x), W.cone(x))


def test_halfspace_channel_is_self_dual():
    W = ch.dmc([[0.8, 0.2], [0.3, 0.7]])
    D = ch.dual_channel(W)
    for x in W.inputs:
        assert equals_cone(D.cone(x), W.cone(x))


# -- n uses -------------------------------------------------------------------

def test_n_use_dmc_counts():
    rows = [[0.8, 0.2], [0.3, 0.7]]
    W = ch.dmc(rows)
    A = ch.n_use_cone(W, 2)
    assert len(A.cells) == 4
    expected = DCCone(A.alphabet, [[np.kron(rows[a], rows[b])] for a in range(2) for b in range(2)])
    assert equals_cone(A, expected)
    assert equals_cone(ch.n_use_cone(W, 1), W.range_cone())
    fixed = ch.n_use_cone(W, 2, mode="fixed", xn=[1, 0])
    assert equals_cone(fixed, halfspace(np.kron(rows[1], rows[0]), A.alphabet))


def test_n_use_feedback_counts_and_membership():
    W = ch.bsc(0.25, feedback=True)
    A = ch.n_use_cone(W, 2)
    assert len(A.cells) == 8
    rng = np.random.default_rng(3)
    for _ in range(200):
        s = rng.normal(size=4)
        assert contains_portfolio(A, s) == lazy_membership("semidirect", (W.cone(0), W.cone(0)), s)


def test_n_use_errors():
    W = ch.dmc([[0.8, 0.2], [0.3, 0.7]])
    with pytest.raises(InputError):
        ch.n_use_cone(W, 0)
    with pytest.raises(InputError):
        ch.n_use_cone(W, 2, mode="fixed", xn=[0])
    with pytest.raises(ResourceError):
        ch.n_use_cone(W, 20, cap=1000)
    V = ch.adversarial(ch.typewriter_edges(5), list("01234"), list("01234"))
    with pytest.raises(UnsupportedRepresentation):
        ch.n_use_cone(V, 2)
