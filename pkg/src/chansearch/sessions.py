"""The probe oracle mediating all algorithm-state interaction.

A session hides a sampled state behind a probe interface, enforces the
accessibility discipline of its locality mode, counts probes, and records
the trace.  Re-probing a link is an error rather than a cache hit: the
decision-tree model never revisits a link, so a duplicate probe always
indicates an algorithm bug.

Accessibility:

* global: any unknown link;
* local forward: unknown links reachable from the source through links
  already probed idle (links adjacent to the source qualify vacuously);
* bilateral local: the forward condition, or its mirror toward the target.
"""

from __future__ import annotations

import json
from enum import Enum

from .errors import DuplicateProbeError, LocalityViolationError
from .graphs import ChannelGraph
from .states import LinkStatus, NetworkState

_UNKNOWN = -1
_BUSY = 0
_IDLE = 1


class LocalityMode(Enum):
    GLOBAL = "global"
    LOCAL_FORWARD = "local"
    BILATERAL_LOCAL = "bilateral"


def compute_accessible(g: ChannelGraph, revealed, mode: LocalityMode) -> set[int]:
    """Accessible unknown links recomputed from scratch; the independent
    oracle against which the session's incremental sets are checked."""
    unknown = {v for v in g.links if revealed[v] == _UNKNOWN}
    if mode is LocalityMode.GLOBAL:
        return unknown
    reach = _closure(g, revealed, forward=True)
    if mode is LocalityMode.BILATERAL_LOCAL:
        reach = reach | _closure(g, revealed, forward=False)
    return unknown & reach


def _closure(g: ChannelGraph, revealed, forward: bool) -> set[int]:
    start = g.source if forward else g.target
    adj = g.out_adj if forward else g.in_adj
    reach = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        if v != start and revealed[v] != _IDLE:
            continue  # closed frontier: only revealed-idle interiors extend
        for w in adj[v]:
            if w not in reach:
                reach.add(w)
                stack.append(w)
    return reach


class ProbeSession:
    """Single-use probe oracle over one (graph, state, mode) triple."""

    def __init__(self, graph: ChannelGraph, state: NetworkState, mode: LocalityMode):
        if state.graph is not graph and (
            state.graph.n_vertices != graph.n_vertices
            or state.graph.edges.shape != graph.edges.shape
            or (state.graph.edges != graph.edges).any()
        ):
            raise ValueError("state does not belong to this graph")
        self.graph = graph
        self.state = state
        self.mode = mode
        self.probe_count = 0
        self.trace: list[tuple[int, LinkStatus]] = []
        self._revealed = [_UNKNOWN] * graph.n_vertices
        self._fwd: list[bool] | None = None
        self._bwd: list[bool] | None = None
        if mode is not LocalityMode.GLOBAL:
            self._fwd = self._seed_reach(forward=True)
        if mode is LocalityMode.BILATERAL_LOCAL:
            self._bwd = self._seed_reach(forward=False)

    def _seed_reach(self, forward: bool) -> list[bool]:
        reach = [False] * self.graph.n_vertices
        start = self.graph.source if forward else self.graph.target
        adj = self.graph.out_adj if forward else self.graph.in_adj
        reach[start] = True
        for w in adj[start]:
            reach[w] = True
        return reach

    def revealed_status(self, v: int) -> LinkStatus | None:
        if not self.graph.is_link(v):
            raise ValueError(f"vertex {v} is not a link")
        r = self._revealed[v]
        return None if r == _UNKNOWN else (LinkStatus.IDLE if r == _IDLE else LinkStatus.BUSY)

    def is_accessible(self, v: int) -> bool:
        if self.mode is LocalityMode.GLOBAL:
            return True
        if self._fwd is not None and self._fwd[v]:
            return True
        return self._bwd is not None and self._bwd[v]

    def accessible_links(self) -> set[int]:
        return {
            v
            for v in self.graph.links
            if self._revealed[v] == _UNKNOWN and self.is_accessible(v)
        }

    def probe(self, v: int) -> LinkStatus:
        g = self.graph
        if not g.is_link(v):
            raise ValueError(f"vertex {v} is not a probe-able link")
        if self._revealed[v] != _UNKNOWN:
            raise DuplicateProbeError(f"duplicate probe of link {v}")
        if not self.is_accessible(v):
            raise LocalityViolationError(
                f"locality violation: link {v} not accessible in {self.mode.value} mode"
            )
        idle = bool(self.state.idle_mask[v])
        self._revealed[v] = _IDLE if idle else _BUSY
        status = LinkStatus.IDLE if idle else LinkStatus.BUSY
        self.trace.append((v, status))
        self.probe_count += 1
        if idle:
            if self._fwd is not None and self._fwd[v]:
                self._expand(v, self._fwd, self.graph.out_adj)
            if self._bwd is not None and self._bwd[v]:
                self._expand(v, self._bwd, self.graph.in_adj)
        return status

    def _expand(self, v: int, reach: list[bool], adj) -> None:
        # v just became a passable interior; grow the frontier through any
        # already-idle vertices it newly exposes.
        stack = [v]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not reach[w]:
                    reach[w] = True
                    if self._revealed[w] == _IDLE:
                        stack.append(w)

    def revealed_snapshot(self) -> list[int]:
        """Copy of the per-vertex reveal array (-1 unknown, 0 busy, 1 idle)."""
        return list(self._revealed)


def trace_to_json(trace) -> str:
    return json.dumps(
        [{"link": int(v), "status": st.value} for v, st in trace], separators=(",", ":")
    )


def trace_from_json(text: str) -> list[tuple[int, LinkStatus]]:
    return [(int(e["link"]), LinkStatus(e["status"])) for e in json.loads(text)]


def replay_trace(g: ChannelGraph, state: NetworkState, trace) -> bool:
    """True iff every recorded observation matches the given state."""
    seen = set()
    for v, status in trace:
        if not g.is_link(v) or v in seen:
            return False
        seen.add(v)
        if state.status(v) is not status:
            return False
    return True
