"""Channel graph construction, validation, and serialization.

A channel graph is an acyclic directed graph with a unique source and a
unique target in which every vertex lies on some directed source-to-target
path.  Vertices other than the two endpoints are called *links*; they are
the only elements that carry an idle/busy status and the only elements a
search algorithm may probe.

Two concrete families are built here:

* the fully parallel graph of depth ``k``: two mirrored complete binary
  trees joined leaf to leaf, giving ``2**k`` source-target paths of
  ``2*k`` links each, one link per rank ``1..2k``;
* the series composition of two depth-``k`` fully parallel graphs, with
  the middle identification vertex ``u`` forming a single-link cut.

Vertices are numbered in breadth-first (rank-major, left-to-right) order
from the source so that builds, exports, and probe traces are
reproducible byte for byte.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import SizeLimitError

DEFAULT_MAX_DEPTH = 22


class GraphKind(Enum):
    FULLY_PARALLEL = "fully_parallel"
    SERIES_COMPOSITION = "series_composition"
    CUSTOM = "custom"


class ChannelGraph:
    """Immutable ranked s-t DAG.

    Attributes:
        n_vertices: vertex count; ids are dense in ``range(n_vertices)``.
        edges: ``(E, 2)`` int array of directed ``from -> to`` pairs.
        source, target: endpoint vertex ids.
        ranks: per-vertex rank, ``0`` at the source.
        kind: construction tag; ``k`` is set for the two built families.
        middle_link: the cut link ``u`` of a series composition, else None.
    """

    def __init__(
        self,
        n_vertices: int,
        edges,
        source: int,
        target: int,
        ranks,
        kind: GraphKind = GraphKind.CUSTOM,
        k: int | None = None,
        middle_link: int | None = None,
    ):
        self.n_vertices = int(n_vertices)
        self.edges = np.ascontiguousarray(np.asarray(edges, dtype=np.int64).reshape(-1, 2))
        self.source = int(source)
        self.target = int(target)
        self.ranks = np.asarray(ranks, dtype=np.int64)
        self.kind = kind
        self.k = k
        self.middle_link = middle_link
        self._out_adj: tuple[tuple[int, ...], ...] | None = None
        self._in_adj: tuple[tuple[int, ...], ...] | None = None
        self._edge_set: frozenset[tuple[int, int]] | None = None
        self._links: tuple[int, ...] | None = None

    # -- basic structure -------------------------------------------------

    @property
    def n_links(self) -> int:
        return self.n_vertices - 2

    @property
    def links(self) -> tuple[int, ...]:
        """All vertex ids except source and target, ascending."""
        if self._links is None:
            skip = {self.source, self.target}
            self._links = tuple(v for v in range(self.n_vertices) if v not in skip)
        return self._links

    def is_link(self, v: int) -> bool:
        return 0 <= v < self.n_vertices and v != self.source and v != self.target

    @property
    def out_adj(self) -> tuple[tuple[int, ...], ...]:
        if self._out_adj is None:
            out: list[list[int]] = [[] for _ in range(self.n_vertices)]
            for a, b in self.edges:
                out[int(a)].append(int(b))
            self._out_adj = tuple(tuple(sorted(ns)) for ns in out)
        return self._out_adj

    @property
    def in_adj(self) -> tuple[tuple[int, ...], ...]:
        if self._in_adj is None:
            inc: list[list[int]] = [[] for _ in range(self.n_vertices)]
            for a, b in self.edges:
                inc[int(b)].append(int(a))
            self._in_adj = tuple(tuple(sorted(ns)) for ns in inc)
        return self._in_adj

    @property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        if self._edge_set is None:
            self._edge_set = frozenset((int(a), int(b)) for a, b in self.edges)
        return self._edge_set

    def fingerprint(self) -> tuple:
        """Hashable identity used for memo caches keyed on graph structure."""
        return (self.n_vertices, self.source, self.target, self.edges.tobytes())

    # -- fully parallel tree coordinates ---------------------------------

    def _require_parallel(self):
        if self.kind is not GraphKind.FULLY_PARALLEL:
            raise ValueError(f"operation requires a fully parallel graph, got {self.kind.value}")

    def forward_vertex(self, depth: int, pos: int) -> int:
        """Vertex id at `depth` (0 = source), position `pos`, in the forward tree."""
        self._require_parallel()
        return (1 << depth) - 1 + pos

    def backward_vertex(self, depth: int, pos: int) -> int:
        """Vertex id at `depth` (0 = target), position `pos`, in the backward tree."""
        self._require_parallel()
        return self.n_vertices - (1 << (depth + 1)) + 1 + pos

    def __repr__(self) -> str:
        tag = self.kind.value if self.k is None else f"{self.kind.value}(k={self.k})"
        return f"ChannelGraph({tag}, vertices={self.n_vertices}, edges={len(self.edges)})"


def build_fully_parallel(k: int, *, max_depth: int = DEFAULT_MAX_DEPTH) -> ChannelGraph:
    """Build the fully parallel channel graph of depth ``k``.

    ``k = 0`` degenerates to a single source->target edge with no links.
    Raises SizeLimitError above ``max_depth`` (the vertex count is
    ``2**(k+2) - 2``).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > max_depth:
        raise SizeLimitError(f"k={k} exceeds maximum depth {max_depth}")
    n = (1 << (k + 2)) - 2
    fw = lambda d, i: (1 << d) - 1 + i
    bw = lambda d, i: n - (1 << (d + 1)) + 1 + i

    edges: list[tuple[int, int]] = []
    for d in range(k):
        for i in range(1 << d):
            edges.append((fw(d, i), fw(d + 1, 2 * i)))
            edges.append((fw(d, i), fw(d + 1, 2 * i + 1)))
    for i in range(1 << k):
        edges.append((fw(k, i), bw(k, i)))
    for d in range(k, 0, -1):
        for i in range(1 << d):
            edges.append((bw(d, i), bw(d - 1, i // 2)))

    ranks = np.empty(n, dtype=np.int64)
    for d in range(k + 1):
        for i in range(1 << d):
            ranks[fw(d, i)] = d
            ranks[bw(d, i)] = 2 * k + 1 - d

    return ChannelGraph(n, edges, 0, n - 1, ranks, GraphKind.FULLY_PARALLEL, k=k)


def build_series_composition(k: int, *, max_depth: int = DEFAULT_MAX_DEPTH) -> ChannelGraph:
    """Join two fully parallel depth-``k`` graphs in series.

    The target of the first copy is identified with the source of the
    second, forming the probe-able middle link ``u``; removing ``u``
    disconnects source from target.
    """
    half = build_fully_parallel(k, max_depth=max_depth)
    m = half.n_vertices
    u = m - 1  # first copy's target becomes the shared link
    offset = m - 1  # second copy's vertex v (> 0) maps to v + offset

    edges = [(int(a), int(b)) for a, b in half.edges]
    for a, b in half.edges:
        a2 = u if a == 0 else int(a) + offset
        b2 = u if b == 0 else int(b) + offset
        edges.append((a2, b2))

    n = 2 * m - 1
    ranks = np.empty(n, dtype=np.int64)
    ranks[:m] = half.ranks
    ranks[m:] = half.ranks[1:] + half.ranks[-1]

    return ChannelGraph(
        n, edges, 0, n - 1, ranks, GraphKind.SERIES_COMPOSITION, k=k, middle_link=u
    )


# -- validation ----------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    vertices: tuple[int, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...] = ()


def _reachable(n: int, adj: Sequence[Sequence[int]], start: int) -> list[bool]:
    seen = [False] * n
    seen[start] = True
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return seen


def validate(g: ChannelGraph) -> ValidationReport:
    """Check the channel-graph invariants; violations are reported, not raised."""
    bad: list[Violation] = []
    n = g.n_vertices

    out_of_range = sorted(
        {int(x) for e in g.edges for x in e if not (0 <= int(x) < n)}
    )
    if out_of_range:
        bad.append(Violation("bad-edge", "edge endpoint out of range", tuple(out_of_range)))
        return ValidationReport(False, tuple(bad))
    if not (0 <= g.source < n) or not (0 <= g.target < n) or g.source == g.target:
        bad.append(Violation("bad-endpoints", "source/target ids invalid"))
        return ValidationReport(False, tuple(bad))

    # Kahn's algorithm; leftovers sit on or behind a cycle.
    indeg = [0] * n
    for _, b in g.edges:
        indeg[int(b)] += 1
    queue = [v for v in range(n) if indeg[v] == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for w in g.out_adj[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    if seen != n:
        cyclic = tuple(v for v in range(n) if indeg[v] > 0)
        bad.append(Violation("cycle", "cycle detected", cyclic))
        return ValidationReport(False, tuple(bad))

    if g.in_adj[g.source]:
        bad.append(Violation("source-indegree", "source has incoming edges", (g.source,)))
    if g.out_adj[g.target]:
        bad.append(Violation("target-outdegree", "target has outgoing edges", (g.target,)))

    from_s = _reachable(n, g.out_adj, g.source)
    to_t = _reachable(n, g.in_adj, g.target)
    stranded = tuple(v for v in range(n) if not (from_s[v] and to_t[v]))
    if stranded:
        bad.append(Violation("stranded", "not on any source-target path", stranded))

    return ValidationReport(not bad, tuple(bad))


def count_st_paths(g: ChannelGraph) -> int:
    """Exact number of directed source-target paths (DP over a topological order)."""
    order = _topological_order(g)
    counts = [0] * g.n_vertices
    counts[g.source] = 1
    for v in order:
        c = counts[v]
        if c:
            for w in g.out_adj[v]:
                counts[w] += c
    return counts[g.target]


def _topological_order(g: ChannelGraph) -> list[int]:
    indeg = [0] * g.n_vertices
    for _, b in g.edges:
        indeg[int(b)] += 1
    queue = [v for v in range(g.n_vertices) if indeg[v] == 0]
    order: list[int] = []
    while queue:
        v = queue.pop()
        order.append(v)
        for w in g.out_adj[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    if len(order) != g.n_vertices:
        raise ValueError("graph contains a cycle")
    return order


# -- serialization -------------------------------------------------------


def _kind_string(g: ChannelGraph) -> str:
    if g.kind is GraphKind.FULLY_PARALLEL:
        return f"FullyParallel({g.k})"
    if g.kind is GraphKind.SERIES_COMPOSITION:
        return f"SeriesComposition({g.k})"
    return "Custom"


def export_graph(g: ChannelGraph, fmt: str) -> str:
    """Serialize to ``"json"`` or ``"dot"`` text; byte-deterministic per graph."""
    if fmt == "json":
        doc = {
            "vertices": g.n_vertices,
            "source": g.source,
            "target": g.target,
            "edges": [[int(a), int(b)] for a, b in g.edges],
            "ranks": [int(r) for r in g.ranks],
            "kind": _kind_string(g),
        }
        return json.dumps(doc, separators=(",", ":")) + "\n"
    if fmt == "dot":
        lines = [f"digraph {_kind_string(g).replace('(', '_').replace(')', '')} {{"]
        for v in range(g.n_vertices):
            lines.append(f"  {v} [rank={int(g.ranks[v])}];")
        for a, b in g.edges:
            lines.append(f"  {int(a)} -> {int(b)};")
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown export format {fmt!r}")


def import_graph(text: str) -> ChannelGraph:
    """Parse the JSON graph schema and validate; invalid graphs raise ValueError.

    Imported graphs are tagged Custom unless the kind string round-trips a
    builder tag, in which case only the tag (not the structure) is trusted
    after validation.
    """
    doc = json.loads(text)
    g = ChannelGraph(
        doc["vertices"],
        doc.get("edges", []),
        doc["source"],
        doc["target"],
        doc.get("ranks", [0] * doc["vertices"]),
        GraphKind.CUSTOM,
    )
    report = validate(g)
    if not report.ok:
        details = "; ".join(v.message for v in report.violations)
        raise ValueError(f"imported graph is not a valid channel graph: {details}")
    m = re.fullmatch(r"(FullyParallel|SeriesComposition)\((\d+)\)", doc.get("kind", ""))
    if m:
        kind = (
            GraphKind.FULLY_PARALLEL
            if m.group(1) == "FullyParallel"
            else GraphKind.SERIES_COMPOSITION
        )
        k = int(m.group(2))
        built = (
            build_fully_parallel(k)
            if kind is GraphKind.FULLY_PARALLEL
            else build_series_composition(k)
        )
        if (
            built.n_vertices == g.n_vertices
            and np.array_equal(built.edges, g.edges)
            and np.array_equal(built.ranks, g.ranks)
        ):
            return built
    return g


def enumerate_st_paths(g: ChannelGraph, limit: int = 1_000_000) -> Iterable[tuple[int, ...]]:
    """Yield every source-target path as a vertex tuple (small graphs only)."""
    count = 0
    stack: list[tuple[int, tuple[int, ...]]] = [(g.source, (g.source,))]
    while stack:
        v, path = stack.pop()
        if v == g.target:
            count += 1
            if count > limit:
                raise SizeLimitError(f"more than {limit} paths")
            yield path
            continue
        for w in reversed(g.out_adj[v]):
            stack.append((w, path + (w,)))
