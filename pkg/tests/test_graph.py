import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from admitcert.graph import (ReductionError, connected_components, height_partition, is_tree,
                             reactive_subnetwork, reduce_parallels, reverse_branch, spanning_tree)
from admitcert.matpower_io import load_network
from admitcert.netmodel import Branch, Network, Shunt, build_admittance
from admitcert.oracle import PROFILES, random_network

from conftest import case_path


def test_plain_parallel_merge():
    red = reduce_parallels(Network(2, (Branch(0, 1, 1.0), Branch(0, 1, 2.0))))
    assert red.network.branches == (Branch(0, 1, 3.0),)
    assert red.branch_groups == ((0, 1),)


def test_distinct_taps_kept():
    red = reduce_parallels(Network(2, (Branch(0, 1, -1j), Branch(0, 1, -1j, 1.05))))
    assert red.network.n_branches == 2


def test_reversed_parallel_merged():
    b = Branch(0, 1, -2j, 1.1)
    red = reduce_parallels(Network(2, (b, reverse_branch(Branch(0, 1, -3j, 1.1)))))
    assert red.network.n_branches == 1 and red.network.branches[0].y == pytest.approx(-5j)


def test_cancellation_raises():
    with pytest.raises(ReductionError):
        reduce_parallels(Network(2, (Branch(0, 1, 1.0), Branch(0, 1, -1.0))))


def test_shunts_summed():
    red = reduce_parallels(Network(2, (Branch(0, 1, 1.0),), (Shunt(1, 1j), Shunt(1, 2j), Shunt(0, 1.0))))
    assert red.network.shunts == (Shunt(0, 1.0), Shunt(1, 3j))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(PROFILES))
def test_reduction_preserves_admittance(seed, profile):
    net = random_network(seed, profile)
    # duplicate a few branches, some of them reversed, so there is something to merge
    extra = tuple(reverse_branch(b) if i % 2 else b for i, b in enumerate(net.branches[::3]))
    net = Network(net.n_nodes, net.branches + extra, net.shunts + net.shunts[:1])
    Y = build_admittance(net).toarray()
    Yr = build_admittance(reduce_parallels(net).network).toarray()
    assert np.max(np.abs(Y - Yr)) <= 1e-12 * max(1.0, np.max(np.abs(Y)))


def test_components():
    assert connected_components(Network(3, (Branch(0, 1, 1.0), Branch(1, 2, 1.0)))) == [[0, 1, 2]]
    assert connected_components(Network(4, (Branch(0, 1, 1.0),))) == [[0, 1], [2], [3]]
    assert len(connected_components(load_network(case_path("case118_ieee")))) == 1


def test_is_tree():
    star = Network(4, tuple(Branch(0, k, 1.0) for k in (1, 2, 3)))
    assert is_tree(star, [0, 1, 2, 3], range(3))
    tri = Network(3, (Branch(0, 1, 1.0), Branch(1, 2, 1.0), Branch(2, 0, 1.0)))
    assert not is_tree(tri, [0, 1, 2], range(3))
    par = Network(2, (Branch(0, 1, 1.0), Branch(0, 1, 1.0, 1.1)))
    assert is_tree(par, [0, 1], range(2))


def test_reactive_subnetwork():
    resistive = Network(3, (Branch(0, 1, 1 - 1j), Branch(1, 2, 2 - 3j)))
    assert reactive_subnetwork(resistive) == []
    grid = Network(4, (Branch(0, 1, 1 - 1j), Branch(1, 2, -5j), Branch(2, 3, 1 - 2j)), (Shunt(2, 0.1j),))
    (comp,) = reactive_subnetwork(grid)
    assert comp.nodes == (1, 2) and comp.branches == (1,) and comp.shunts == (0,)
    net = reduce_parallels(load_network(case_path("case14_ieee")))
    assert len(reactive_subnetwork(net)) >= 1


def test_spanning_tree_examples():
    t = spanning_tree(Network(1), [0], [])
    assert t.root == 0 and t.parent == {0: 0} and t.chords == ()
    path = Network(3, (Branch(0, 1, 1.0), Branch(1, 2, 1.0)))
    t = spanning_tree(path, [0, 1, 2], [0, 1], root=0)
    assert tuple(t.parent[n] for n in range(3)) == (0, 0, 1)
    tri = Network(3, (Branch(0, 1, 1.0), Branch(1, 2, 1.0), Branch(2, 0, 1.0)))
    t = spanning_tree(tri, [0, 1, 2], [0, 1, 2])
    assert len(t.order) - 1 == 2 and len(t.chords) == 1


def test_height_partition_rooted_at_six():
    edges = [(6, 8), (8, 2), (8, 5), (2, 1)]
    net = Network(9, tuple(Branch(u, v, -1j) for u, v in edges))
    t = spanning_tree(net, [1, 2, 5, 6, 8], range(4), root=6)
    assert height_partition(t) == [[1, 5], [2], [8], [6]]


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(PROFILES))
def test_spanning_tree_invariants(seed, profile):
    net = random_network(seed, profile)
    for comp in connected_components(net):
        t = spanning_tree(net, comp, range(net.n_branches) if len(comp) > 1 else [])
        if len(comp) == 1:
            continue
        assert sorted(t.order) == comp
        assert len(t.order) - 1 + len(t.chords) == net.n_branches
        depth = t.depth()
        assert all(depth[t.parent[n]] == depth[n] - 1 for n in t.order[1:])
