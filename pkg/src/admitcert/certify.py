"""Structural certification of bus admittance matrix invertibility.

Per island of the (parallel-reduced) network:

1. every branch and shunt must have non-negative conductance;
2. every connected component of the purely reactive subnetwork must satisfy
   one of three sufficient conditions (uniform sign of susceptances, a tree
   without shunts, or a tree whose grounded-parent ladder never resonates);
3. then the island matrix has full rank if it has any shunt, and otherwise
   the rank of its generalized incidence matrix, which is decided in linear
   time from the tap products around the cycles of a spanning tree.

When a step fails the island is INCONCLUSIVE; no numerical rank is attempted.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .graph import (OpCounter, ReactiveComponent, ReducedNetwork, SpanningTree, _tick,
                    adjacency, connected_components, is_tree, reactive_subnetwork,
                    reduce_parallels, spanning_tree)
from .netmodel import Network, build_admittance, stamp_branch

DEFAULT_TOL = 1e-12


class Verdict(str, Enum):
    INVERTIBLE = "INVERTIBLE"
    SINGULAR = "SINGULAR"
    INCONCLUSIVE = "INCONCLUSIVE"


class Condition(str, Enum):
    TREE_GROUNDED = "TREE_GROUNDED"
    TREE_NO_SHUNT = "TREE_NO_SHUNT"
    UNIFORM_REACTANCE = "UNIFORM_REACTANCE"
    NONE = "NONE"


class NotATree(ValueError):
    pass


@dataclass
class AssumptionReport:
    connected: bool
    all_series_nonzero: bool
    all_taps_nonzero: bool
    nonneg_branch_conductance: bool
    nonneg_shunt_conductance: bool
    offending_elements: list[tuple[str, int, complex]] = field(default_factory=list)

    @property
    def hold(self) -> bool:
        """Hypotheses needed per island (connectivity is handled island by island)."""
        return (self.all_series_nonzero and self.all_taps_nonzero
                and self.nonneg_branch_conductance and self.nonneg_shunt_conductance)


@dataclass
class ConditionEvidence:
    component_id: int
    condition: Condition
    root: int | None = None
    details: dict[int, dict[str, complex]] | None = None
    nodes: tuple[int, ...] = ()


@dataclass
class IslandResult:
    nodes: tuple[int, ...]
    verdict: Verdict
    rank: int | None
    witness: np.ndarray | None = None
    reason: str = ""


@dataclass
class Certificate:
    verdict: Verdict
    rank_claim: int | None
    evidence: list[ConditionEvidence]
    null_witness: np.ndarray | None
    tolerance: float
    islands: list[IslandResult]
    assumptions: AssumptionReport
    reduced: ReducedNetwork
    reason: str = ""

    @property
    def n_nodes(self) -> int:
        return self.reduced.base.n_nodes


def check_assumptions(red: ReducedNetwork, tol: float = DEFAULT_TOL,
                      counter: OpCounter | None = None) -> AssumptionReport:
    net = red.network
    offending: list[tuple[str, int, complex]] = []
    series_ok = taps_ok = branch_ok = shunt_ok = True
    for l, b in enumerate(net.branches):
        _tick(counter)
        if b.y == 0:
            series_ok = False
            offending.append(("branch_zero_admittance", l, b.y))
        if b.tap == 0:
            taps_ok = False
            offending.append(("branch_zero_tap", l, b.tap))
        if b.y.real < -tol:
            branch_ok = False
            offending.append(("branch_negative_conductance", l, b.y))
    for s_idx, s in enumerate(net.shunts):
        _tick(counter)
        if s.y.real < -tol:
            shunt_ok = False
            offending.append(("shunt_negative_conductance", s_idx, s.y))
    connected = len(connected_components(net, counter)) <= 1
    return AssumptionReport(connected, series_ok, taps_ok, branch_ok, shunt_ok, offending)


def _component_admittances(net: Network, comp: ReactiveComponent) -> list[complex]:
    return ([net.branches[l].y for l in comp.branches]
            + [net.shunts[s].y for s in comp.shunts])


def check_condition_uniform(net: Network, comp: ReactiveComponent, tol: float = DEFAULT_TOL) -> bool:
    """Only inductors (all Im y <= -tol) or only capacitors (all Im y >= tol)."""
    ims = [y.imag for y in _component_admittances(net, comp)]
    return all(b <= -tol for b in ims) or all(b >= tol for b in ims)


def check_condition_tree_no_shunt(net: Network, comp: ReactiveComponent) -> bool:
    """A radial component without shunts.

    Parallel branches between one node pair are rejected here: with mixed
    susceptance signs their aggregate block can be singular while the incidence
    rows are independent.  Such components are left to the grounded-tree check.
    """
    return (not comp.shunts and len(comp.branches) == len(comp.nodes) - 1
            and is_tree(net, comp.nodes, comp.branches))


def _pair_blocks(net: Network, tree: SpanningTree, branches: Sequence[int],
                 counter: OpCounter | None) -> dict[int, np.ndarray]:
    """2x2 aggregate ``Y^{p,n}`` ordered (parent, node) for every non-root node."""
    child_of_pair: dict[tuple[int, int], int] = {}
    for n in tree.order[1:]:
        p = tree.parent[n]
        child_of_pair[(min(p, n), max(p, n))] = n
    blocks: dict[int, np.ndarray] = {n: np.zeros((2, 2), dtype=complex) for n in tree.order[1:]}
    for l in branches:
        _tick(counter)
        b = net.branches[l]
        n = child_of_pair[(min(b.from_node, b.to_node), max(b.from_node, b.to_node))]
        s = stamp_branch(b)
        if b.from_node == tree.parent[n]:
            blocks[n] += s
        else:
            blocks[n] += s[::-1, ::-1]
    return blocks


def resonance_threshold(net: Network, comp: ReactiveComponent, tol: float) -> float:
    ys = _component_admittances(net, comp)
    return tol * (1.0 + max((abs(y.imag) for y in ys), default=0.0))


def check_condition_grounded_tree(net: Network, comp: ReactiveComponent, root: int,
                                  tol: float = DEFAULT_TOL,
                                  counter: OpCounter | None = None,
                                  adj: dict | None = None,
                                  ) -> tuple[bool, dict[int, dict[str, complex]]]:
    """Ladder recursion from the leaves towards ``root``.

    For each non-root node ``n`` with parent ``p``::

        ysb_n = shunt_n + sum(yb_c for children c)
        d_n   = Y22^{p,n} + ysb_n                # admittance to ground with p grounded
        yb_n  = Y11^{p,n} - Y12^{p,n} Y21^{p,n} / d_n

    The check passes when every ``|d_n|`` and the root's ``|ysb_r|`` exceed the
    resonance threshold.  Returns the per-node quantities computed so far.
    """
    if root not in comp.nodes:
        raise ValueError(f"root {root} is not in the component")
    if not is_tree(net, comp.nodes, comp.branches):
        raise NotATree(f"component {comp.id} is not a tree")
    tree = spanning_tree(net, comp.nodes, comp.branches, root=root, counter=counter, adj=adj)
    blocks = _pair_blocks(net, tree, comp.branches, counter)
    thr = resonance_threshold(net, comp, tol)

    shunt_at = {net.shunts[s].node: net.shunts[s].y for s in comp.shunts}
    ysb: dict[int, complex] = {n: shunt_at.get(n, 0j) for n in tree.order}
    details: dict[int, dict[str, complex]] = {}
    for n in reversed(tree.order):
        _tick(counter)
        if n == root:
            details[n] = {"ysb": ysb[n]}
            return abs(ysb[n]) > thr, details
        y = blocks[n]
        d = y[1, 1] + ysb[n]
        details[n] = {"ysb": ysb[n], "to_ground": d}
        if not abs(d) > thr:
            return False, details
        yb = y[0, 0] - y[0, 1] * y[1, 0] / d
        details[n]["yb"] = yb
        ysb[tree.parent[n]] += yb
    raise AssertionError("root not reached")  # pragma: no cover


def incidence_rank(net: Network, nodes: Sequence[int], branches: Sequence[int],
                   tree: SpanningTree | None = None, tol: float = DEFAULT_TOL,
                   counter: OpCounter | None = None,
                   ) -> tuple[int, np.ndarray | None]:
    """Rank of the generalized incidence matrix of a connected node set.

    Node potentials are propagated along a spanning tree so that every tree
    row ``v_from - a v_to`` vanishes; each chord then tests whether the tap
    product around its cycle is one.  Returns ``(len(nodes) - 1, v)`` with
    ``v`` ordered like ``sorted(nodes)`` when every chord passes, otherwise
    ``(len(nodes), None)``.  Magnitudes are accumulated as logarithms and the
    largest entry of ``v`` is scaled to one.
    """
    nodes = sorted(nodes)
    if tree is None:
        tree = spanning_tree(net, nodes, branches, counter=counter)
    logmag = {tree.root: 0.0}
    angle = {tree.root: 0.0}
    for n in tree.order[1:]:
        _tick(counter)
        p = tree.parent[n]
        b = net.branches[tree.parent_branch[n]]
        la, aa = math.log(abs(b.tap)), cmath.phase(b.tap)
        if b.from_node == p:
            # v_p = a v_n
            logmag[n], angle[n] = logmag[p] - la, angle[p] - aa
        else:
            # v_n = a v_p
            logmag[n], angle[n] = logmag[p] + la, angle[p] + aa

    for l in tree.chords:
        _tick(counter)
        b = net.branches[l]
        i, k = b.from_node, b.to_node
        # ratio a v_k / v_i; the row vanishes iff it equals one
        r = cmath.exp(complex(logmag[k] + math.log(abs(b.tap)) - logmag[i],
                              angle[k] + cmath.phase(b.tap) - angle[i]))
        if abs(1 - r) > tol * max(1.0, abs(r)):
            return len(nodes), None

    top = max(logmag.values())
    v = np.array([cmath.rect(math.exp(logmag[n] - top), angle[n]) for n in nodes], dtype=complex)
    return len(nodes) - 1, v


def _check_component(net: Network, comp: ReactiveComponent, tol: float,
                     max_root_trials: int | None, counter: OpCounter | None) -> ConditionEvidence:
    _tick(counter, len(comp.branches) + len(comp.shunts))
    if check_condition_uniform(net, comp, tol):
        return ConditionEvidence(comp.id, Condition.UNIFORM_REACTANCE, nodes=comp.nodes)
    if check_condition_tree_no_shunt(net, comp):
        return ConditionEvidence(comp.id, Condition.TREE_NO_SHUNT, nodes=comp.nodes)
    if is_tree(net, comp.nodes, comp.branches):
        adj = adjacency(net, comp.branches, counter)
        trials = len(comp.nodes) if max_root_trials is None else max_root_trials
        for root in comp.nodes[:trials]:
            ok, details = check_condition_grounded_tree(net, comp, root, tol, counter, adj)
            if ok:
                return ConditionEvidence(comp.id, Condition.TREE_GROUNDED, root, details, comp.nodes)
    return ConditionEvidence(comp.id, Condition.NONE, nodes=comp.nodes)


def certify(net: Network, tol: float = DEFAULT_TOL, *, strict_connectivity: bool = False,
            max_root_trials: int | None = None, counter: OpCounter | None = None) -> Certificate:
    """Certify whether the bus admittance matrix of ``net`` is invertible or singular."""
    red = reduce_parallels(net, tol, counter)
    rnet = red.network
    assumptions = check_assumptions(red, tol, counter)
    islands = connected_components(rnet, counter)

    def _result(verdict, rank, islands_out, evidence, witness=None, reason=""):
        return Certificate(verdict, rank, sorted(evidence, key=lambda e: e.component_id),
                           witness, tol, islands_out, assumptions, red, reason)

    if strict_connectivity and len(islands) > 1:
        return _result(Verdict.INCONCLUSIVE, None, [], [],
                       reason=f"network has {len(islands)} islands")

    island_of = np.empty(net.n_nodes, dtype=np.int64)
    for k, nodes in enumerate(islands):
        island_of[nodes] = k
    bad_islands: set[int] = set()
    for kind, idx, _ in assumptions.offending_elements:
        node = rnet.shunts[idx].node if kind.startswith("shunt") else rnet.branches[idx].from_node
        bad_islands.add(int(island_of[node]))

    evidence = []
    failed_islands: set[int] = set()
    for comp in reactive_subnetwork(red, tol, counter):
        k = int(island_of[comp.nodes[0]])
        if k in bad_islands:
            continue
        ev = _check_component(rnet, comp, tol, max_root_trials, counter)
        evidence.append(ev)
        if ev.condition is Condition.NONE:
            failed_islands.add(k)

    island_branches: list[list[int]] = [[] for _ in islands]
    for l, b in enumerate(rnet.branches):
        island_branches[island_of[b.from_node]].append(l)
    has_shunt = np.zeros(len(islands), dtype=bool)
    for s in rnet.shunts:
        has_shunt[island_of[s.node]] = True

    results: list[IslandResult] = []
    for k, nodes in enumerate(islands):
        if k in bad_islands:
            results.append(IslandResult(tuple(nodes), Verdict.INCONCLUSIVE, None,
                                        reason="negative conductance present"))
        elif k in failed_islands:
            results.append(IslandResult(tuple(nodes), Verdict.INCONCLUSIVE, None,
                                        reason="reactive component not covered by the conditions"))
        elif has_shunt[k]:
            results.append(IslandResult(tuple(nodes), Verdict.INVERTIBLE, len(nodes)))
        else:
            rank, v = incidence_rank(rnet, nodes, island_branches[k], tol=tol, counter=counter)
            verdict = Verdict.INVERTIBLE if rank == len(nodes) else Verdict.SINGULAR
            results.append(IslandResult(tuple(nodes), verdict, rank, v))

    verdicts = {r.verdict for r in results}
    if Verdict.INCONCLUSIVE in verdicts:
        reasons = sorted({r.reason for r in results if r.verdict is Verdict.INCONCLUSIVE})
        return _result(Verdict.INCONCLUSIVE, None, results, evidence, reason="; ".join(reasons))
    rank = sum(r.rank for r in results)
    if Verdict.SINGULAR in verdicts:
        first = next(r for r in results if r.verdict is Verdict.SINGULAR)
        witness = np.zeros(net.n_nodes, dtype=complex)
        witness[list(first.nodes)] = first.witness
        return _result(Verdict.SINGULAR, rank, results, evidence, witness)
    return _result(Verdict.INVERTIBLE, rank, results, evidence)


def witness_residual(net: Network, v: np.ndarray) -> float:
    """``||Y v||_inf / ||v||_inf``."""
    y = build_admittance(net)
    return float(np.max(np.abs(y @ v)) / np.max(np.abs(v)))
