"""Network description, generalized incidence matrix and bus admittance assembly.

Every series element is a branch ``from -> to`` with series admittance ``y`` and
a complex tap ratio ``a``.  Its contribution to the bus admittance matrix is the
rank-one block ``u y u^H`` with ``u^H = [1, -a]`` over the columns ``(from, to)``.
Plain lines use ``a = 1``; off-nominal transformers and phase shifters carry
their taps inside the incidence matrix instead of as extra shunts.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp


class NetworkError(ValueError):
    """Raised when a network violates the modelling assumptions."""


@dataclass(frozen=True)
class Branch:
    from_node: int
    to_node: int
    y: complex
    tap: complex = 1.0


@dataclass(frozen=True)
class Shunt:
    node: int
    y: complex


def _finite(z: complex) -> bool:
    return cmath.isfinite(z)


@dataclass(frozen=True)
class Network:
    """Immutable balanced single-phase network.

    ``bus_ids`` optionally maps dense node indices back to the identifiers used
    by the source file.  Shunts with exactly zero admittance are dropped.
    """

    n_nodes: int
    branches: tuple[Branch, ...] = ()
    shunts: tuple[Shunt, ...] = ()
    bus_ids: tuple[int, ...] | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.n_nodes < 0:
            raise NetworkError(f"negative node count {self.n_nodes}")
        branches = tuple(
            Branch(int(b.from_node), int(b.to_node), complex(b.y), complex(b.tap))
            for b in self.branches
        )
        for idx, b in enumerate(branches):
            for node in (b.from_node, b.to_node):
                if not 0 <= node < self.n_nodes:
                    raise NetworkError(f"branch {idx}: node {node} out of range")
            if b.from_node == b.to_node:
                raise NetworkError(f"branch {idx}: self loop at node {b.from_node}")
            if not (_finite(b.y) and _finite(b.tap)):
                raise NetworkError(f"branch {idx}: non-finite parameter")
            if b.y == 0:
                raise NetworkError(f"branch {idx}: zero series admittance")
            if b.tap == 0:
                raise NetworkError(f"branch {idx}: zero tap ratio")
        shunts = []
        for idx, s in enumerate(self.shunts):
            y = complex(s.y)
            if not 0 <= int(s.node) < self.n_nodes:
                raise NetworkError(f"shunt {idx}: node {s.node} out of range")
            if not _finite(y):
                raise NetworkError(f"shunt {idx}: non-finite admittance")
            if y != 0:
                shunts.append(Shunt(int(s.node), y))
        if self.bus_ids is not None:
            ids = tuple(int(i) for i in self.bus_ids)
            if len(ids) != self.n_nodes or len(set(ids)) != len(ids):
                raise NetworkError("bus_ids must be unique, one per node")
            object.__setattr__(self, "bus_ids", ids)
        object.__setattr__(self, "branches", branches)
        object.__setattr__(self, "shunts", tuple(shunts))

    @classmethod
    def from_arrays(
        cls,
        n_nodes: int,
        from_nodes: Sequence[int],
        to_nodes: Sequence[int],
        y: Sequence[complex],
        tap: Sequence[complex] | None = None,
        shunt_nodes: Sequence[int] = (),
        shunt_y: Sequence[complex] = (),
        **kwargs,
    ) -> "Network":
        if tap is None:
            tap = [1.0] * len(y)
        branches = tuple(Branch(int(f), int(t), complex(v), complex(a))
                         for f, t, v, a in zip(from_nodes, to_nodes, y, tap))
        shunts = tuple(Shunt(int(n), complex(v)) for n, v in zip(shunt_nodes, shunt_y))
        return cls(n_nodes, branches, shunts, **kwargs)

    @classmethod
    def _trusted(cls, n_nodes: int, branches: tuple[Branch, ...], shunts: tuple[Shunt, ...],
                 bus_ids: tuple[int, ...] | None = None, name: str = "") -> "Network":
        """Build from parts taken from an already validated network, skipping checks."""
        net = object.__new__(cls)
        for key, value in (("n_nodes", n_nodes), ("branches", branches), ("shunts", shunts),
                           ("bus_ids", bus_ids), ("name", name)):
            object.__setattr__(net, key, value)
        return net

    @property
    def n_branches(self) -> int:
        return len(self.branches)

    @cached_property
    def from_idx(self) -> np.ndarray:
        return np.array([b.from_node for b in self.branches], dtype=np.int64)

    @cached_property
    def to_idx(self) -> np.ndarray:
        return np.array([b.to_node for b in self.branches], dtype=np.int64)

    @cached_property
    def y_series(self) -> np.ndarray:
        return np.array([b.y for b in self.branches], dtype=complex)

    @cached_property
    def taps(self) -> np.ndarray:
        return np.array([b.tap for b in self.branches], dtype=complex)

    @cached_property
    def shunt_vector(self) -> np.ndarray:
        """Total shunt admittance per node (zeros where no shunt is attached)."""
        out = np.zeros(self.n_nodes, dtype=complex)
        for s in self.shunts:
            out[s.node] += s.y
        return out

    def admittance_dense(self) -> np.ndarray:
        return build_admittance(self).toarray()

    def label(self, node: int) -> int:
        return self.bus_ids[node] if self.bus_ids is not None else node


def build_incidence(net: Network) -> sp.csr_matrix:
    """Generalized incidence matrix: row ``l`` is ``1`` at from(l), ``-a_l`` at to(l)."""
    m = net.n_branches
    rows = np.repeat(np.arange(m), 2)
    cols = np.column_stack([net.from_idx, net.to_idx]).ravel() if m else np.zeros(0, int)
    vals = np.column_stack([np.ones(m, dtype=complex), -net.taps]).ravel() if m else np.zeros(0, complex)
    return sp.csr_matrix((vals, (rows, cols)), shape=(m, net.n_nodes), dtype=complex)


def stamp_branch(b: Branch) -> np.ndarray:
    """2x2 admittance block of a single branch, ordered (from, to)."""
    y, a = complex(b.y), complex(b.tap)
    return np.array([[y, -a * y],
                     [-a.conjugate() * y, abs(a) ** 2 * y]], dtype=complex)


def build_admittance(net: Network) -> sp.csr_matrix:
    """Sparse bus admittance matrix ``A^H diag(y) A + diag(y_shunt)``.

    Entries are accumulated in branch order followed by shunts, so repeated
    calls are bit-identical.
    """
    f, t = net.from_idx, net.to_idx
    y, a = net.y_series, net.taps
    rows = np.concatenate([f, f, t, t])
    cols = np.concatenate([f, t, f, t])
    vals = np.concatenate([y, -a * y, -np.conj(a) * y, np.abs(a) ** 2 * y])
    if net.shunts:
        sn = np.array([s.node for s in net.shunts], dtype=np.int64)
        sy = np.array([s.y for s in net.shunts], dtype=complex)
        rows = np.concatenate([rows, sn])
        cols = np.concatenate([cols, sn])
        vals = np.concatenate([vals, sy])
    # COO -> CSR sums duplicates in input order
    return sp.coo_matrix((vals, (rows, cols)), shape=(net.n_nodes, net.n_nodes),
                         dtype=complex).tocsr()


def subnetwork(net: Network, nodes: Sequence[int], branches: Sequence[int],
               shunts: Sequence[int] = ()) -> tuple[Network, np.ndarray]:
    """Extract the network induced by ``nodes`` with the selected branches/shunts.

    Returns the re-indexed network and the array of original node indices.
    """
    nodes = np.asarray(sorted(nodes), dtype=np.int64)
    local = {int(n): i for i, n in enumerate(nodes)}
    br = tuple(Branch(local[net.branches[l].from_node], local[net.branches[l].to_node],
                      net.branches[l].y, net.branches[l].tap) for l in branches)
    sh = tuple(Shunt(local[net.shunts[s].node], net.shunts[s].y) for s in shunts)
    return Network(len(nodes), br, sh), nodes
