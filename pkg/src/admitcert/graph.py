"""Structural routines over a network: parallel reduction, islands, spanning trees
and extraction of the purely reactive subnetwork.

All traversals are breadth-first and touch every node and branch a bounded
number of times.  Pass an :class:`OpCounter` to record that work.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .netmodel import Branch, Network, Shunt


class ReductionError(ValueError):
    pass


@dataclass
class OpCounter:
    """Counts elementary graph operations (node visits plus edge scans)."""

    count: int = 0

    def add(self, n: int = 1) -> None:
        self.count += n


def _tick(counter: OpCounter | None, n: int = 1) -> None:
    if counter is not None:
        counter.count += n


def taps_equal(a: complex, b: complex, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a))


def reverse_branch(b: Branch) -> Branch:
    """Same two-port seen from the other end: ``(y, a) -> (|a|^2 y, 1/a)``."""
    a = complex(b.tap)
    return Branch(b.to_node, b.from_node, abs(a) ** 2 * b.y, 1.0 / a)


@dataclass(frozen=True)
class ReducedNetwork:
    """Network with parallel same-tap branches merged and shunts summed per node.

    ``network`` is the reduced network; ``branch_groups[l]`` lists the indices
    of the original branches merged into reduced branch ``l``.
    """

    base: Network
    network: Network
    branch_groups: tuple[tuple[int, ...], ...]
    shunt_groups: tuple[tuple[int, ...], ...]

    @property
    def parallel_groups(self) -> dict[tuple[tuple[int, int], complex], list[int]]:
        out = {}
        for b, group in zip(self.network.branches, self.branch_groups):
            pair = (min(b.from_node, b.to_node), max(b.from_node, b.to_node))
            out[(pair, b.tap)] = list(group)
        return out


def reduce_parallels(net: Network, tol: float = 1e-12,
                     counter: OpCounter | None = None) -> ReducedNetwork:
    """Merge parallel branches with equal taps and parallel shunts.

    Branches oriented against the first member of their group are flipped with
    :func:`reverse_branch` before comparing taps.  Branches between the same
    nodes but with different taps stay separate.
    """
    m = net.n_branches
    _tick(counter, m)
    lo = np.minimum(net.from_idx, net.to_idx)
    hi = np.maximum(net.from_idx, net.to_idx)
    _, inverse, counts = np.unique(lo * max(net.n_nodes, 1) + hi, return_inverse=True,
                                   return_counts=True)
    shared = counts[inverse] > 1

    # pair -> list of [representative Branch, accumulated y, member indices];
    # only branches that share their node pair go through the grouping
    by_pair: dict[tuple[int, int], list[list]] = {}
    slots: list = []
    for idx, b in enumerate(net.branches):
        if not shared[idx]:
            slots.append((idx, b))
            continue
        pair = (int(lo[idx]), int(hi[idx]))
        groups = by_pair.setdefault(pair, [])
        for g in groups:
            rep: Branch = g[0]
            cand = b if b.from_node == rep.from_node else reverse_branch(b)
            if taps_equal(rep.tap, cand.tap, tol):
                g[1].append(cand.y)
                g[2].append(idx)
                break
        else:
            g = [b, [b.y], [idx]]
            groups.append(g)
            slots.append(g)

    branches: list[Branch] = []
    groups_out: list[tuple[int, ...]] = []
    for slot in slots:
        if isinstance(slot, tuple):
            branches.append(slot[1])
            groups_out.append((slot[0],))
            continue
        rep, ys, members = slot
        y = complex(sum(ys))
        if abs(y) <= tol * max(abs(v) for v in ys):
            pair = (min(rep.from_node, rep.to_node), max(rep.from_node, rep.to_node))
            raise ReductionError(
                f"parallel branches {members} between nodes {pair} cancel to zero admittance")
        branches.append(Branch(rep.from_node, rep.to_node, y, rep.tap) if len(members) > 1 else rep)
        groups_out.append(tuple(members))

    per_node: dict[int, list[int]] = {}
    for idx, s in enumerate(net.shunts):
        _tick(counter)
        per_node.setdefault(s.node, []).append(idx)
    shunts: list[Shunt] = []
    shunt_groups: list[tuple[int, ...]] = []
    for node in sorted(per_node):
        members = per_node[node]
        parts = [net.shunts[i].y for i in members]
        y = complex(sum(parts))
        # a shunt that cancels out is physically absent
        if abs(y) <= tol * max(abs(v) for v in parts):
            continue
        shunts.append(Shunt(node, y))
        shunt_groups.append(tuple(members))

    reduced = Network._trusted(net.n_nodes, tuple(branches), tuple(shunts), net.bus_ids, net.name)
    return ReducedNetwork(net, reduced, tuple(groups_out), tuple(shunt_groups))


def adjacency(net: Network, branches: Iterable[int] | None = None,
              counter: OpCounter | None = None) -> dict[int, list[tuple[int, int]]]:
    """node -> [(neighbour, branch index), ...] restricted to ``branches``."""
    adj: dict[int, list[tuple[int, int]]] = {}
    idxs = range(net.n_branches) if branches is None else branches
    for l in idxs:
        _tick(counter)
        b = net.branches[l]
        adj.setdefault(b.from_node, []).append((b.to_node, l))
        adj.setdefault(b.to_node, []).append((b.from_node, l))
    return adj


def _bfs_components(nodes: Iterable[int], adj: dict[int, list[tuple[int, int]]],
                    counter: OpCounter | None) -> list[list[int]]:
    seen: set[int] = set()
    comps: list[list[int]] = []
    for start in nodes:
        if start in seen:
            continue
        seen.add(start)
        comp = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            _tick(counter)
            for v, _ in adj.get(u, ()):
                _tick(counter)
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    queue.append(v)
        comp.sort()
        comps.append(comp)
    return comps


def connected_components(net: Network, counter: OpCounter | None = None) -> list[list[int]]:
    """Islands of the branch graph; ground is not a node, so shunts never join islands."""
    adj = adjacency(net, counter=counter)
    return _bfs_components(range(net.n_nodes), adj, counter)


def is_tree(net: Network, nodes: Sequence[int], branches: Iterable[int]) -> bool:
    """Tree test on the simple graph: parallel branches count as one edge.

    The node set is assumed connected through ``branches``.
    """
    pairs = set()
    for l in branches:
        b = net.branches[l]
        pairs.add((min(b.from_node, b.to_node), max(b.from_node, b.to_node)))
    return len(pairs) == len(nodes) - 1


@dataclass(frozen=True)
class ReactiveComponent:
    id: int
    nodes: tuple[int, ...]
    branches: tuple[int, ...]
    shunts: tuple[int, ...]


def is_reactive(y: complex, tol: float) -> bool:
    return abs(y.real) <= tol


def reactive_subnetwork(red: ReducedNetwork | Network, tol: float = 1e-12,
                        counter: OpCounter | None = None) -> list[ReactiveComponent]:
    """Connected components of the purely reactive branches and their reactive shunts.

    Branch and shunt indices refer to the reduced network.  Nodes touched only
    by resistive branches are not part of any component.
    """
    net = red.network if isinstance(red, ReducedNetwork) else red
    reactive = [l for l, b in enumerate(net.branches) if is_reactive(b.y, tol)]
    _tick(counter, net.n_branches)
    adj = adjacency(net, reactive, counter)
    comps = _bfs_components(sorted(adj), adj, counter)

    comp_of: dict[int, int] = {}
    for k, nodes in enumerate(comps):
        for n in nodes:
            comp_of[n] = k
    comp_branches: list[list[int]] = [[] for _ in comps]
    for l in reactive:
        comp_branches[comp_of[net.branches[l].from_node]].append(l)
    comp_shunts: list[list[int]] = [[] for _ in comps]
    for s_idx, s in enumerate(net.shunts):
        _tick(counter)
        if s.node in comp_of and is_reactive(s.y, tol):
            comp_shunts[comp_of[s.node]].append(s_idx)
    return [ReactiveComponent(k, tuple(nodes), tuple(comp_branches[k]), tuple(comp_shunts[k]))
            for k, nodes in enumerate(comps)]


@dataclass(frozen=True)
class SpanningTree:
    """BFS spanning tree.  ``parent[root] == root`` and ``parent_branch[root]`` is -1."""

    root: int
    parent: dict[int, int]
    parent_branch: dict[int, int]
    order: tuple[int, ...]
    chords: tuple[int, ...] = field(default=())

    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {n: [] for n in self.order}
        for n in self.order:
            if n != self.root:
                out[self.parent[n]].append(n)
        return out

    def depth(self) -> dict[int, int]:
        d = {self.root: 0}
        for n in self.order[1:]:
            d[n] = d[self.parent[n]] + 1
        return d


def spanning_tree(net: Network, nodes: Sequence[int], branches: Iterable[int],
                  root: int | None = None, counter: OpCounter | None = None,
                  adj: dict[int, list[tuple[int, int]]] | None = None) -> SpanningTree:
    """BFS tree over the given (connected) node and branch subset.

    The root defaults to the lowest node index.  Branches not used by the tree,
    including extra parallels, are reported as chords.
    """
    if not nodes:
        raise ValueError("empty node set")
    branches = list(branches)
    if adj is None:
        adj = adjacency(net, branches, counter)
    if root is None:
        root = min(nodes)
    parent = {root: root}
    parent_branch = {root: -1}
    order = [root]
    queue = deque([root])
    while queue:
        u = queue.popleft()
        _tick(counter)
        for v, l in adj.get(u, ()):
            _tick(counter)
            if v not in parent:
                parent[v] = u
                parent_branch[v] = l
                order.append(v)
                queue.append(v)
    if len(order) != len(nodes):
        raise ValueError("node set is not connected through the given branches")
    used = set(parent_branch.values())
    chords = tuple(l for l in branches if l not in used)
    return SpanningTree(root, parent, parent_branch, tuple(order), chords)


def height_partition(tree: SpanningTree) -> list[list[int]]:
    """Group nodes by height: leaves first, then nodes whose children are all placed.

    The last group is ``[root]``.
    """
    children = tree.children()
    height: dict[int, int] = {}
    for n in reversed(tree.order):
        kids = children[n]
        height[n] = 0 if not kids else 1 + max(height[c] for c in kids)
    levels: list[list[int]] = [[] for _ in range(height[tree.root] + 1)]
    for n in tree.order:
        levels[height[n]].append(n)
    return [sorted(level) for level in levels]
