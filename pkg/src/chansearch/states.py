"""Random link states under the independent-vacancy (Lee-Le Gall) model.

Each link of a channel graph is idle with probability ``q`` independently
of all others; the source and target are always idle and carry no stored
status.  States are sampled with a counter-based generator keyed by
``(seed, trial_index, link id)``, so any trial of any experiment can be
regenerated bit-identically, in any order, on any number of threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

from .graphs import ChannelGraph


class LinkStatus(Enum):
    IDLE = "idle"
    BUSY = "busy"


_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_SALT = np.uint64(0x8E38_55D1_5C6D_49F7)


def _mix64(x: np.ndarray | np.uint64) -> np.ndarray | np.uint64:
    # SplitMix64 finalizer; bijective on uint64 with full avalanche.
    x = np.uint64(x) if np.isscalar(x) else x
    x = x ^ (x >> np.uint64(30))
    x = x * np.uint64(0xBF58476D1CE4E5B9)
    x = x ^ (x >> np.uint64(27))
    x = x * np.uint64(0x94D049BB133111EB)
    x = x ^ (x >> np.uint64(31))
    return x


def _mix_grid_inplace(h: np.ndarray, tmp: np.ndarray) -> None:
    # SplitMix64 finalizer with explicit buffers; the grids get large.
    np.right_shift(h, np.uint64(30), out=tmp)
    np.bitwise_xor(h, tmp, out=h)
    np.multiply(h, np.uint64(0xBF58476D1CE4E5B9), out=h)
    np.right_shift(h, np.uint64(27), out=tmp)
    np.bitwise_xor(h, tmp, out=h)
    np.multiply(h, np.uint64(0x94D049BB133111EB), out=h)
    np.right_shift(h, np.uint64(31), out=tmp)
    np.bitwise_xor(h, tmp, out=h)


def _hash_grid53(seed: int, trials: np.ndarray, links: np.ndarray) -> np.ndarray:
    """53-bit hash words on the (trial, link) grid; ``word * 2**-53`` is the
    uniform deviate of that (trial, link) pair."""
    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        key = _mix64(np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF) ^ _SALT)
        t = _mix64(key ^ ((trials + np.uint64(1)) * _GOLDEN))
        h = t[:, None] ^ ((links + np.uint64(1)) * _GOLDEN)[None, :]
        tmp = np.empty_like(h)
        _mix_grid_inplace(h, tmp)
        np.right_shift(h, np.uint64(11), out=h)
    return h


def link_uniforms(seed: int, trial_index: int, link_ids: np.ndarray) -> np.ndarray:
    """Uniform(0,1) deviates for the given links of one trial."""
    grid = link_uniform_grid(seed, np.asarray([trial_index], dtype=np.uint64), link_ids)
    return grid[0]


def link_uniform_grid(seed: int, trial_indices: np.ndarray, link_ids: np.ndarray) -> np.ndarray:
    """Uniform(0,1) deviates on the (trial, link) grid, shape (T, L)."""
    trials = np.asarray(trial_indices, dtype=np.uint64)
    links = np.asarray(link_ids, dtype=np.uint64)
    return _hash_grid53(seed, trials, links).astype(np.float64) * (2.0 ** -53)


def idle_threshold(q: float) -> np.uint64:
    """Integer threshold equivalent to the float predicate: with 53-bit
    hash words ``w``, ``w * 2**-53 < q`` is exactly ``w < ceil(q * 2**53)``."""
    return np.uint64(math.ceil(q * 9007199254740992.0))  # q * 2**53, exact in float64


def link_idle_grid(seed: int, trial_indices: np.ndarray, link_ids: np.ndarray, q: float) -> np.ndarray:
    """Boolean idle grid, elementwise identical to ``link_uniform_grid < q``."""
    trials = np.asarray(trial_indices, dtype=np.uint64)
    links = np.asarray(link_ids, dtype=np.uint64)
    return _hash_grid53(seed, trials, links) < idle_threshold(q)


@dataclass(frozen=True, eq=False)
class NetworkState:
    """One full idle/busy assignment to the links of a graph.

    ``idle_mask`` covers every vertex for traversal convenience; the
    source and target entries are fixed True and are not link statuses.
    """

    graph: ChannelGraph
    q: float
    seed: int
    trial_index: int
    idle_mask: np.ndarray

    def status(self, v: int) -> LinkStatus:
        if not self.graph.is_link(v):
            raise ValueError(f"vertex {v} is not a link")
        return LinkStatus.IDLE if self.idle_mask[v] else LinkStatus.BUSY

    @property
    def statuses(self) -> dict[int, LinkStatus]:
        return {v: self.status(v) for v in self.graph.links}

    def n_idle_links(self) -> int:
        return sum(1 for v in self.graph.links if self.idle_mask[v])


def sample_state(g: ChannelGraph, q: float, seed: int, trial_index: int) -> NetworkState:
    """Sample each link idle independently with probability ``q``."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"vacancy probability q={q} outside [0, 1]")
    if trial_index < 0:
        raise ValueError("trial_index must be nonnegative")
    link_ids = np.asarray(g.links, dtype=np.uint64)
    idle = np.ones(g.n_vertices, dtype=bool)
    if len(link_ids):
        idle[link_ids.astype(np.int64)] = link_uniforms(seed, trial_index, link_ids) < q
    return NetworkState(g, q, seed, trial_index, idle)


def state_from_idle_links(g: ChannelGraph, idle_links: Mapping[int, bool] | np.ndarray) -> NetworkState:
    """Build an explicit state; ``idle_links`` maps link id -> idle, or is a
    bool array aligned with ``g.links``.  Meant for enumeration oracles."""
    idle = np.ones(g.n_vertices, dtype=bool)
    if isinstance(idle_links, Mapping):
        if set(idle_links) != set(g.links):
            raise ValueError("statuses must cover exactly the links")
        for v, flag in idle_links.items():
            idle[v] = bool(flag)
    else:
        arr = np.asarray(idle_links, dtype=bool)
        if arr.shape != (g.n_links,):
            raise ValueError("idle array must align with g.links")
        idle[np.asarray(g.links, dtype=np.int64)] = arr
    return NetworkState(g, float("nan"), -1, -1, idle)


def is_linked(g: ChannelGraph, state: NetworkState) -> bool:
    """True iff an all-idle directed source-target path exists."""
    idle = state.idle_mask
    seen = np.zeros(g.n_vertices, dtype=bool)
    seen[g.source] = True
    stack = [g.source]
    out = g.out_adj
    while stack:
        v = stack.pop()
        if v == g.target:
            return True
        for w in out[v]:
            if not seen[w] and (w == g.target or idle[w]):
                seen[w] = True
                stack.append(w)
    return bool(seen[g.target])


def verify_path_certificate(g: ChannelGraph, state: NetworkState, path) -> bool:
    """Check a claimed idle path: a directed source->target walk whose
    intermediate vertices are all idle links."""
    path = list(path)
    if len(path) < 2 or path[0] != g.source or path[-1] != g.target:
        return False
    for a, b in zip(path, path[1:]):
        if (a, b) not in g.edge_set:
            return False
    for v in path[1:-1]:
        if not g.is_link(v) or not state.idle_mask[v]:
            return False
    return True


def verify_cut_certificate(g: ChannelGraph, state: NetworkState, cut) -> bool:
    """Check a claimed busy cut: every member a busy link, and deleting the
    members disconnects source from target."""
    cut = set(cut)
    if not cut:
        return False
    for v in cut:
        if not g.is_link(v) or state.idle_mask[v]:
            return False
    return not _connects_avoiding(g, cut)


def _connects_avoiding(g: ChannelGraph, removed: set[int]) -> bool:
    if g.source in removed or g.target in removed:
        return False
    seen = {g.source}
    stack = [g.source]
    while stack:
        v = stack.pop()
        if v == g.target:
            return True
        for w in g.out_adj[v]:
            if w not in seen and w not in removed:
                seen.add(w)
                stack.append(w)
    return False


def busy_frontier_cut(g: ChannelGraph, state: NetworkState) -> set[int]:
    """The busy links on the boundary of the idle-reachable region.

    When the state is not linked this set is a busy cut, which makes the
    linked/blocked dichotomy constructive: exactly one of ``is_linked``
    and ``verify_cut_certificate(busy_frontier_cut(...))`` holds.
    """
    idle = state.idle_mask
    region = np.zeros(g.n_vertices, dtype=bool)  # reachable through idle interiors
    region[g.source] = True
    stack = [g.source]
    frontier: set[int] = set()
    while stack:
        v = stack.pop()
        if v != g.source and v != g.target and not idle[v]:
            frontier.add(v)
            continue
        for w in g.out_adj[v]:
            if not region[w]:
                region[w] = True
                stack.append(w)
    return frontier
