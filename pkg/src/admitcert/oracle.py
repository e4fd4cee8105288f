"""Dense reference computations and random test networks.

The rank oracle works on dense matrices through a singular value
decomposition and is meant for desk-scale checks only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .netmodel import Branch, Network, Shunt

DEFAULT_SIZE_CAP = 2000

PROFILES = ("resistive", "reactive_tree", "reactive_loop", "mixed", "taps")


class SizeExceeded(ValueError):
    pass


@dataclass(frozen=True)
class RankResult:
    rank: int
    singular_values: np.ndarray
    threshold_used: float


def _dense(m, cap: int) -> np.ndarray:
    if sp.issparse(m):
        m = m.toarray()
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    if max(m.shape) > cap:
        raise SizeExceeded(f"matrix of shape {m.shape} exceeds the dense cap {cap}")
    return m


def dense_rank(m, tol: float = 1e-12, cap: int = DEFAULT_SIZE_CAP) -> RankResult:
    """Numerical rank: singular values above ``tol * sigma_max * max(shape)``."""
    a = _dense(m, cap)
    if a.size == 0:
        return RankResult(0, np.zeros(0), 0.0)
    s = np.linalg.svd(a, compute_uv=False)
    thr = tol * (s[0] if s.size else 0.0) * max(a.shape)
    return RankResult(int(np.sum(s > thr)), s, float(thr))


def null_vector(m, tol: float = 1e-12, cap: int = DEFAULT_SIZE_CAP) -> np.ndarray | None:
    """Unit right-null vector when ``m`` is numerically rank deficient, else None.

    The residual satisfies ``||m v|| <= tol * max(shape) * ||m||_2``.
    """
    a = _dense(m, cap)
    _, s, vh = np.linalg.svd(a)
    n = a.shape[1]
    thr = tol * (s[0] if s.size else 0.0) * max(a.shape)
    rank = int(np.sum(s > thr))
    if rank >= n:
        return None
    return vh[-1].conj()


def _random_tree(rng: np.random.Generator, n: int) -> list[tuple[int, int]]:
    perm = rng.permutation(n)
    return [(int(perm[rng.integers(0, i)]), int(perm[i])) for i in range(1, n)]


def _orient(rng, u, v):
    return (u, v) if rng.random() < 0.5 else (v, u)


def _inductor(rng) -> complex:
    return complex(0.0, -rng.uniform(0.5, 20.0))


def _capacitor(rng) -> complex:
    return complex(0.0, rng.uniform(0.5, 20.0))


def _resistive(rng) -> complex:
    return complex(rng.uniform(0.2, 5.0), -rng.uniform(0.0, 20.0))


def _off_nominal_tap(rng) -> complex:
    return rng.uniform(0.9, 1.1) * np.exp(1j * rng.uniform(-0.3, 0.3))


def _tap(rng, p_off: float) -> complex:
    return _off_nominal_tap(rng) if rng.random() < p_off else 1.0 + 0j


def random_network(seed: int, profile: str = "mixed", n_nodes: int | None = None) -> Network:
    """Deterministic random connected network for a given seed and profile.

    Profiles:

    ``resistive``
        lossy branches and shunts only, no reactive component.
    ``reactive_tree``
        a radial network of inductors and capacitors with reactive shunts;
        some instances are tuned to resonate at a leaf.
    ``reactive_loop``
        meshed reactive networks, either of one reactance sign or mixed.
    ``mixed``
        resistive, inductive and capacitive branches on a meshed graph.
    ``taps``
        off-nominal and phase-shifting taps on meshed graphs, often without
        shunts, plus transformers split into their pi equivalent.

    Without ``n_nodes`` the result has 2 to 12 nodes; with it, ``reactive_loop``
    and ``taps`` may add one node to the requested size.
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    rng = np.random.default_rng([seed, PROFILES.index(profile)])
    n = int(n_nodes if n_nodes is not None else rng.integers(2, 13))
    # profiles that append a node never go past this size
    max_n = n + 1 if n_nodes is not None else 12
    edges = _random_tree(rng, n)
    branches: list[Branch] = []
    shunts: list[Shunt] = []

    if profile == "resistive":
        edges += [(int(u), int(v)) for u, v in rng.integers(0, n, size=(rng.integers(0, n), 2)) if u != v]
        for u, v in edges:
            f, t = _orient(rng, u, v)
            branches.append(Branch(f, t, _resistive(rng), _tap(rng, 0.2)))
        for node in range(n):
            if rng.random() < 0.3:
                shunts.append(Shunt(node, complex(rng.uniform(0.01, 1.0), rng.uniform(-1, 1))))

    elif profile == "reactive_tree":
        for u, v in edges:
            f, t = _orient(rng, u, v)
            y = _inductor(rng) if rng.random() < 0.6 else _capacitor(rng)
            branches.append(Branch(f, t, y, _tap(rng, 0.2)))
        for node in range(n):
            if rng.random() < 0.4:
                y = _capacitor(rng) * 0.05 if rng.random() < 0.6 else _inductor(rng) * 0.05
                shunts.append(Shunt(node, y))
        if n >= 2 and rng.random() < 0.3:
            # tune a shunt so a leaf resonates with its feeding branch
            b = branches[-1]
            leaf = edges[-1][1]
            shunts = [s for s in shunts if s.node != leaf]
            own = abs(b.tap) ** 2 * b.y if leaf == b.to_node else b.y
            shunts.append(Shunt(leaf, -own))
        elif n >= 2 and rng.random() < 0.3:
            # pick the shunt at one node that makes the whole ladder singular:
            # det(Y + s e_r e_r^T) = det(Y) + s det(Y without row/col r) = 0
            r = int(rng.integers(0, n))
            shunts = [s for s in shunts if s.node != r]
            y = Network(n, tuple(branches), tuple(shunts)).admittance_dense()
            minor = np.delete(np.delete(y, r, 0), r, 1)
            dm = np.linalg.det(minor) if n > 1 else 1.0
            if abs(dm) > 1e-9:
                shunts.append(Shunt(r, -np.linalg.det(y) / dm))

    elif profile == "reactive_loop":
        extra = max(1, int(rng.integers(1, n + 1))) if n >= 3 else 1
        for _ in range(extra):
            u, v = rng.choice(n, size=2, replace=False)
            edges.append((int(u), int(v)))
        uniform = rng.random() < 0.5
        sign = _inductor if rng.random() < 0.5 else _capacitor
        for u, v in edges:
            f, t = _orient(rng, u, v)
            if uniform:
                y = sign(rng)
            else:
                y = _inductor(rng) if rng.random() < 0.5 else _capacitor(rng)
            branches.append(Branch(f, t, y, _tap(rng, 0.3)))
        for node in range(n):
            if rng.random() < 0.3:
                y = sign(rng) * 0.05 if uniform else (_capacitor(rng) if rng.random() < 0.5 else _inductor(rng)) * 0.05
                shunts.append(Shunt(node, y))
        # hang a resistive tail on some instances so the component sits in a larger grid
        if n < max_n and rng.random() < 0.5:
            branches.append(Branch(int(rng.integers(0, n)), n, _resistive(rng)))
            shunts.append(Shunt(n, complex(rng.uniform(0.01, 1.0), 0.0)))
            n += 1

    elif profile == "mixed":
        edges += [(int(u), int(v)) for u, v in rng.integers(0, n, size=(rng.integers(0, n), 2)) if u != v]
        for u, v in edges:
            f, t = _orient(rng, u, v)
            kind = rng.random()
            y = _resistive(rng) if kind < 0.5 else (_inductor(rng) if kind < 0.8 else _capacitor(rng))
            branches.append(Branch(f, t, y, _tap(rng, 0.3)))
        for node in range(n):
            r = rng.random()
            if r < 0.15:
                shunts.append(Shunt(node, complex(rng.uniform(0.01, 1.0), rng.uniform(-1, 1))))
            elif r < 0.3:
                shunts.append(Shunt(node, _capacitor(rng) * 0.05))
            elif r < 0.4:
                shunts.append(Shunt(node, _inductor(rng) * 0.05))

    else:  # taps
        if n >= 3:
            for _ in range(int(rng.integers(0, n))):
                u, v = rng.choice(n, size=2, replace=False)
                edges.append((int(u), int(v)))
        lossy = rng.random() < 0.5
        for u, v in edges:
            f, t = _orient(rng, u, v)
            y = _resistive(rng) if lossy else _inductor(rng)
            branches.append(Branch(f, t, y, _tap(rng, 0.6)))
        if rng.random() < 0.3:
            # parallel pair with a distinct tap
            b = branches[int(rng.integers(0, len(branches)))]
            branches.append(Branch(b.from_node, b.to_node, b.y * rng.uniform(0.5, 2.0), _off_nominal_tap(rng)))
        if n < max_n and rng.random() < 0.3:
            # real-tap transformer written as its pi equivalent: zero-impedance loop through ground
            u = int(rng.integers(0, n))
            a = rng.uniform(0.9, 1.1)
            y = _inductor(rng)
            branches.append(Branch(u, n, a * y))
            shunts.append(Shunt(u, (1 - a) * y))
            shunts.append(Shunt(n, a * (a - 1) * y))
            n += 1
        elif rng.random() < 0.3:
            shunts.append(Shunt(int(rng.integers(0, n)), complex(rng.uniform(0.01, 1.0), 0.0)))

    return Network(n, tuple(branches), tuple(shunts), name=f"{profile}-{seed}")


def radial_chain(n_nodes: int, seed: int = 0) -> Network:
    """Path ``0-1-...-(n-1)`` mixing lossy lines, inductors and capacitors, with shunts.

    Long reactive stretches make the grounded-tree ladder check run over large
    components, so certification cost covers every stage of the pipeline.
    """
    rng = np.random.default_rng(seed)
    kind = rng.random(n_nodes - 1)
    mag = rng.uniform(1.0, 10.0, n_nodes - 1)
    y = np.where(kind < 0.2, mag * (0.1 - 1j), np.where(kind < 0.7, -1j * mag, 1j * mag))
    shunt = np.where(rng.random(n_nodes) < 0.5, 0.01j, 0.02 + 0.01j)
    return Network.from_arrays(n_nodes, np.arange(n_nodes - 1), np.arange(1, n_nodes), y,
                               shunt_nodes=np.arange(n_nodes), shunt_y=shunt,
                               name=f"chain-{n_nodes}")
