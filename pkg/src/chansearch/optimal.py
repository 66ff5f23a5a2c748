"""Exact minimum expected probe counts by DP over information states.

An information state assigns Unknown/Idle/Busy to every link.  A state is
terminal when the verdict is already determined: some source-target path
is revealed all idle, or busy links cut every path.  Otherwise the value
recurrence minimizes over the links admissible under the locality mode:

    V(state) = min over admissible v of  1 + q*V(state[v=Idle]) + p*V(state[v=Busy])

Deterministic DP attains the optimum over randomized algorithms as well,
since a randomized strategy is a mixture of deterministic ones.

States are encoded canonically in base 3 over the graph's ascending link
order.  Internally the solver packs (idle set, busy set) into bitmask
pairs, precomputes terminal and accessibility lookup tables over all
2**L idle subsets, enumerates the reachable state graph once per
(graph, mode), and then evaluates any number of q values by a vectorized
bottom-up sweep.  The guard on link count (default 13, env CSL_MAX_LINKS)
keeps the 3**L state space in check.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .analytics import exact_cost_unilat
from .errors import InternalConsistencyError, SizeLimitError
from .graphs import ChannelGraph, _topological_order, build_fully_parallel
from .search import ALGORITHMS
from .sessions import LocalityMode, compute_accessible
from .states import LinkStatus

DEFAULT_MAX_LINKS = 13
MAX_LINKS_ENV = "CSL_MAX_LINKS"


def _max_links_limit(max_links: int | None) -> int:
    if max_links is not None:
        return int(max_links)
    return int(os.environ.get(MAX_LINKS_ENV, DEFAULT_MAX_LINKS))


@dataclass(frozen=True)
class InfoState:
    """Canonical base-3 encoding of per-link knowledge: digit i (over the
    graph's ascending link order) is 0 Unknown, 1 Idle, 2 Busy."""

    key: int


def info_state_from_statuses(g: ChannelGraph, revealed: Mapping[int, LinkStatus]) -> InfoState:
    key = 0
    for i, v in enumerate(g.links):
        status = revealed.get(v)
        if status is LinkStatus.IDLE:
            key += 3 ** i
        elif status is LinkStatus.BUSY:
            key += 2 * 3 ** i
    return InfoState(key)


def statuses_from_info_state(g: ChannelGraph, state: InfoState) -> dict[int, LinkStatus]:
    out: dict[int, LinkStatus] = {}
    key = state.key
    for v in g.links:
        digit = key % 3
        key //= 3
        if digit == 1:
            out[v] = LinkStatus.IDLE
        elif digit == 2:
            out[v] = LinkStatus.BUSY
    return out


class _GraphTables:
    """Lookup tables over all 2**L link subsets of one graph.

    ``linked[m]`` tells whether an s-t path survives when exactly the
    links in mask ``m`` are passable; it answers both terminal questions
    (idle-path found / busy cut formed).  ``acc_fwd[m]`` / ``acc_bwd[m]``
    give the accessible-link bitmask when the revealed-idle set is ``m``.
    """

    def __init__(self, g: ChannelGraph):
        self.graph = g
        self.links = list(g.links)
        self.index = {v: i for i, v in enumerate(self.links)}
        L = len(self.links)
        self.L = L
        self.full = (1 << L) - 1
        n_masks = 1 << L
        masks = np.arange(n_masks, dtype=np.uint64)
        has_bit = {
            v: ((masks >> np.uint64(i)) & np.uint64(1)).astype(bool)
            for v, i in self.index.items()
        }
        topo = _topological_order(g)

        reach: list[np.ndarray | None] = [None] * g.n_vertices
        for v in topo:
            if v == g.source:
                reach[v] = np.ones(n_masks, dtype=bool)
                continue
            acc = np.zeros(n_masks, dtype=bool)
            for u in g.in_adj[v]:
                if reach[u] is not None:
                    acc |= reach[u]
            if g.is_link(v):
                acc &= has_bit[v]
            reach[v] = acc
        self.linked = reach[g.target]

        self.acc_fwd = self._closure_table(g, topo, has_bit, n_masks, forward=True)
        self.acc_bwd = self._closure_table(g, topo, has_bit, n_masks, forward=False)

    def _closure_table(self, g, topo, has_bit, n_masks, forward: bool) -> np.ndarray:
        start = g.source if forward else g.target
        order = topo if forward else list(reversed(topo))
        in_adj = g.in_adj if forward else g.out_adj
        member: list[np.ndarray | None] = [None] * g.n_vertices
        acc_mask = np.zeros(n_masks, dtype=np.uint64)
        for v in order:
            if v == start:
                member[v] = np.ones(n_masks, dtype=bool)
            else:
                acc = np.zeros(n_masks, dtype=bool)
                for u in in_adj[v]:
                    if member[u] is None:
                        continue
                    passable = member[u] if u == start else member[u] & has_bit[u]
                    acc |= passable
                member[v] = acc
            if g.is_link(v):
                acc_mask |= member[v].astype(np.uint64) << np.uint64(self.index[v])
        return acc_mask

    def is_terminal(self, idle_mask: int, busy_mask: int) -> bool:
        return bool(self.linked[idle_mask]) or not bool(self.linked[self.full ^ busy_mask])

    def admissible_mask(self, idle_mask: int, busy_mask: int, mode: LocalityMode) -> int:
        unknown = self.full & ~(idle_mask | busy_mask)
        if mode is LocalityMode.GLOBAL:
            return unknown
        acc = int(self.acc_fwd[idle_mask])
        if mode is LocalityMode.BILATERAL_LOCAL:
            acc |= int(self.acc_bwd[idle_mask])
        return unknown & acc


_TABLE_CACHE: dict[tuple, _GraphTables] = {}
_STATE_GRAPH_CACHE: dict[tuple, "_StateGraph"] = {}


def _tables_for(g: ChannelGraph) -> _GraphTables:
    key = g.fingerprint()
    tables = _TABLE_CACHE.get(key)
    if tables is None:
        tables = _TABLE_CACHE[key] = _GraphTables(g)
    return tables


def _state_graph_for(g: ChannelGraph, mode: LocalityMode) -> "_StateGraph":
    key = (g.fingerprint(), mode)
    sg = _STATE_GRAPH_CACHE.get(key)
    if sg is None:
        sg = _STATE_GRAPH_CACHE[key] = _StateGraph(_tables_for(g), mode)
    return sg


class _StateGraph:
    """Reachable nonterminal states and their probe transitions, layered
    by number of revealed links; q-independent, so one build serves every
    evaluation."""

    def __init__(self, tables: _GraphTables, mode: LocalityMode):
        L = tables.L
        shift = np.uint64(L)
        full = np.uint64(tables.full)
        one = np.uint64(1)
        linked = tables.linked

        def terminal(keys: np.ndarray) -> np.ndarray:
            idle = (keys >> shift).astype(np.int64)
            busy = (keys & full).astype(np.int64)
            avail = tables.full ^ busy
            return linked[idle] | ~linked[avail]

        self.tables = tables
        self.mode = mode
        root = np.zeros(1, dtype=np.uint64)
        self.root_terminal = bool(terminal(root)[0])
        self.n_terminal = 0
        if self.root_terminal:
            self.n_states = 0
            self.n_terminal = 1
            self.keys = np.zeros(0, dtype=np.uint64)
            return

        layer = root
        offset = 0
        key_layers: list[np.ndarray] = []
        state_bounds: list[tuple[int, int]] = []
        row_bounds: list[tuple[int, int]] = []
        r_state: list[np.ndarray] = []
        r_link: list[np.ndarray] = []
        r_ci: list[np.ndarray] = []
        r_cb: list[np.ndarray] = []
        rows_so_far = 0

        while layer.size:
            key_layers.append(layer)
            state_bounds.append((offset, offset + layer.size))
            idle = (layer >> shift).astype(np.int64)
            busy = (layer & full).astype(np.int64)
            unknown = tables.full & ~(idle | busy)
            if mode is LocalityMode.GLOBAL:
                adm = unknown
            else:
                acc = tables.acc_fwd[idle].astype(np.int64)
                if mode is LocalityMode.BILATERAL_LOCAL:
                    acc |= tables.acc_bwd[idle].astype(np.int64)
                adm = unknown & acc
            if (adm == 0).any():
                raise InternalConsistencyError(
                    "nonterminal state with no admissible probe"
                )

            lay_state: list[np.ndarray] = []
            lay_link: list[np.ndarray] = []
            lay_ck_i: list[np.ndarray] = []
            lay_ck_b: list[np.ndarray] = []
            for b in range(L):
                sel = np.nonzero((adm >> b) & 1)[0]
                if sel.size == 0:
                    continue
                bit = np.uint64(1 << b)
                keys_sel = layer[sel]
                lay_state.append((offset + sel).astype(np.int64))
                lay_link.append(np.full(sel.size, tables.links[b], dtype=np.int32))
                lay_ck_i.append(keys_sel | (bit << shift))
                lay_ck_b.append(keys_sel | bit)

            state_arr = np.concatenate(lay_state)
            link_arr = np.concatenate(lay_link)
            ck_i = np.concatenate(lay_ck_i)
            ck_b = np.concatenate(lay_ck_b)
            term_i = terminal(ck_i)
            term_b = terminal(ck_b)

            pool = np.concatenate([ck_i[~term_i], ck_b[~term_b]])
            next_layer = np.unique(pool)
            next_offset = offset + layer.size
            self.n_terminal += int(
                np.unique(np.concatenate([ck_i[term_i], ck_b[term_b]])).size
            ) if (term_i.any() or term_b.any()) else 0

            ci = np.where(term_i, -1, next_offset + np.searchsorted(next_layer, ck_i)).astype(np.int64)
            cb = np.where(term_b, -1, next_offset + np.searchsorted(next_layer, ck_b)).astype(np.int64)

            order = np.lexsort((link_arr, state_arr))
            r_state.append(state_arr[order])
            r_link.append(link_arr[order])
            r_ci.append(ci[order])
            r_cb.append(cb[order])
            row_bounds.append((rows_so_far, rows_so_far + state_arr.size))
            rows_so_far += state_arr.size

            layer = next_layer
            offset = next_offset

        self.keys = np.concatenate(key_layers)
        self.n_states = int(self.keys.size)
        self.state_bounds = state_bounds
        self.row_bounds = row_bounds
        self.row_state = np.concatenate(r_state)
        self.row_link = np.concatenate(r_link)
        self.row_ci = np.concatenate(r_ci)
        self.row_cb = np.concatenate(r_cb)
        self.row_start = np.searchsorted(self.row_state, np.arange(self.n_states + 1))

    @property
    def states_explored(self) -> int:
        return self.n_states + self.n_terminal

    def solve(self, q: float) -> tuple[float, np.ndarray, np.ndarray]:
        """Bottom-up value sweep; returns (root value, V, best row per state)."""
        if self.n_states == 0:
            return 0.0, np.zeros(1), np.zeros(0, dtype=np.int64)
        p = 1.0 - q
        V = np.zeros(self.n_states + 1)  # final slot: terminal value 0, hit via index -1
        best = np.zeros(self.n_states, dtype=np.int64)
        for (s0, s1), (r0, r1) in zip(reversed(self.state_bounds), reversed(self.row_bounds)):
            vals = 1.0 + q * V[self.row_ci[r0:r1]] + p * V[self.row_cb[r0:r1]]
            offs = self.row_start[s0:s1] - r0
            mins = np.minimum.reduceat(vals, offs)
            V[s0:s1] = mins
            widths = np.diff(np.append(offs, r1 - r0))
            is_min = vals <= np.repeat(mins, widths)
            cand = np.where(is_min, np.arange(r0, r1), np.iinfo(np.int64).max)
            best[s0:s1] = np.minimum.reduceat(cand, offs)
        return float(V[0]), V, best


class OptimalResult:
    """Optimal value plus the canonical optimal strategy.

    ``best_probe`` maps every reachable nonterminal InfoState to the
    lowest-id link attaining the minimum; it is materialized lazily since
    the dictionary can dwarf the value computation for large state spaces.
    """

    def __init__(self, value: float, states_explored: int, tables, state_keys, best_links):
        self.value = value
        self.states_explored = states_explored
        self._tables = tables
        self._state_keys = state_keys
        self._best_links = best_links
        self._best_probe: dict[InfoState, int] | None = None

    @property
    def best_probe(self) -> dict[InfoState, int]:
        if self._best_probe is None:
            keys3 = _packed_to_base3(self._state_keys, self._tables.L)
            self._best_probe = {
                InfoState(int(k)): int(v) for k, v in zip(keys3, self._best_links)
            }
        return self._best_probe


def _packed_to_base3(keys: np.ndarray, L: int) -> np.ndarray:
    out = np.zeros(keys.shape, dtype=np.int64)
    pow3 = 1
    for i in range(L):
        idle_bit = ((keys >> np.uint64(L + i)) & np.uint64(1)).astype(np.int64)
        busy_bit = ((keys >> np.uint64(i)) & np.uint64(1)).astype(np.int64)
        out += (idle_bit + 2 * busy_bit) * pow3
        pow3 *= 3
    return out


def _base3_from_masks(tables: _GraphTables, idle_mask: int, busy_mask: int) -> int:
    key = 0
    pow3 = 1
    for i in range(tables.L):
        if (idle_mask >> i) & 1:
            key += pow3
        elif (busy_mask >> i) & 1:
            key += 2 * pow3
        pow3 *= 3
    return key


def is_terminal_state(g: ChannelGraph, state: InfoState) -> bool:
    tables = _tables_for(g)
    idle = busy = 0
    key = state.key
    for i in range(tables.L):
        digit = key % 3
        key //= 3
        if digit == 1:
            idle |= 1 << i
        elif digit == 2:
            busy |= 1 << i
    return tables.is_terminal(idle, busy)


def optimal_expected_probes(
    g: ChannelGraph,
    q: float,
    mode: LocalityMode,
    *,
    max_links: int | None = None,
) -> OptimalResult:
    """Minimum expected probe count over all correct search strategies
    respecting ``mode``, with the canonical optimal strategy."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"vacancy probability q={q} outside [0, 1]")
    limit = _max_links_limit(max_links)
    if g.n_links > limit:
        raise SizeLimitError(
            f"{g.n_links} links exceeds the DP guard of {limit} "
            f"(state space up to 3**{g.n_links} = {3 ** g.n_links}); "
            f"raise via {MAX_LINKS_ENV} or max_links"
        )
    tables = _tables_for(g)
    sg = _state_graph_for(g, mode)
    value, _, best_rows = sg.solve(q)
    best_links = sg.row_link[best_rows] if sg.n_states else np.zeros(0, dtype=np.int32)
    return OptimalResult(value, sg.states_explored, tables, sg.keys, best_links)


def _recursive_value(g: ChannelGraph, q: float, mode: LocalityMode, memoize: bool = True) -> float:
    """Reference evaluator: plain recursion over per-vertex reveal lists,
    terminality by BFS, accessibility via the session-module oracle.
    Exponential without memoization; intended for small graphs in tests."""
    p = 1.0 - q
    revealed = [-1] * g.n_vertices
    memo: dict[tuple, float] | None = {} if memoize else None

    def is_terminal() -> bool:
        idle_path = _st_path_exists(g, lambda v: revealed[v] == 1)
        open_path = _st_path_exists(g, lambda v: revealed[v] != 0)
        return idle_path or not open_path

    def solve() -> float:
        if memo is not None:
            key = tuple(revealed)
            hit = memo.get(key)
            if hit is not None:
                return hit
        if is_terminal():
            result = 0.0
        else:
            result = float("inf")
            for v in sorted(compute_accessible(g, revealed, mode)):
                revealed[v] = 1
                a = solve()
                revealed[v] = 0
                b = solve()
                revealed[v] = -1
                result = min(result, 1.0 + q * a + p * b)
        if memo is not None:
            memo[tuple(revealed)] = result
        return result

    return solve()


def _st_path_exists(g: ChannelGraph, passable) -> bool:
    seen = {g.source}
    stack = [g.source]
    while stack:
        v = stack.pop()
        if v == g.target:
            return True
        for w in g.out_adj[v]:
            if w not in seen and (w == g.target or passable(w)):
                seen.add(w)
                stack.append(w)
    return False


def evaluate_fixed_strategy(
    g: ChannelGraph,
    q: float,
    strategy: Mapping[InfoState, int],
    mode: LocalityMode = LocalityMode.GLOBAL,
) -> float:
    """Exact expected probe count of a deterministic strategy by forward
    probability-weighted traversal; the strategy must name an admissible
    probe for every reachable nonterminal state."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"vacancy probability q={q} outside [0, 1]")
    tables = _tables_for(g)
    p = 1.0 - q

    def walk(idle_mask: int, busy_mask: int) -> float:
        if tables.is_terminal(idle_mask, busy_mask):
            return 0.0
        state = InfoState(_base3_from_masks(tables, idle_mask, busy_mask))
        probe = strategy.get(state)
        if probe is None:
            raise ValueError(f"strategy undefined for reachable state {state.key}")
        if probe not in tables.index:
            raise ValueError(f"strategy probes non-link {probe}")
        bit = 1 << tables.index[probe]
        if not tables.admissible_mask(idle_mask, busy_mask, mode) & bit:
            raise ValueError(
                f"strategy probes link {probe}, inadmissible in {mode.value} mode"
            )
        return 1.0 + q * walk(idle_mask | bit, busy_mask) + p * walk(idle_mask, busy_mask | bit)

    return walk(0, 0)


class _NextProbe(Exception):
    def __init__(self, link: int):
        self.link = link


class _ScriptedSession:
    """Duck-typed probe session that replays a prescribed observation map
    and surfaces the first unscripted probe; used to read an algorithm's
    decision tree off its own execution."""

    def __init__(self, graph: ChannelGraph, script: Mapping[int, bool]):
        self.graph = graph
        self.mode = LocalityMode.GLOBAL
        self.script = script
        self.trace: list[tuple[int, LinkStatus]] = []

    def probe(self, v: int):
        if v not in self.script:
            raise _NextProbe(v)
        status = LinkStatus.IDLE if self.script[v] else LinkStatus.BUSY
        self.trace.append((v, status))
        return status


def induced_strategy(algo: str, g: ChannelGraph) -> dict[InfoState, int]:
    """The per-state probe choices a deterministic algorithm makes, read
    off by replaying it against every observation history it can reach."""
    try:
        fn = ALGORITHMS[algo]
    except KeyError:
        raise ValueError(f"unknown algorithm {algo!r}") from None
    strategy: dict[InfoState, int] = {}
    stack: list[dict[int, bool]] = [{}]
    while stack:
        script = stack.pop()
        try:
            fn(_ScriptedSession(g, script))
            continue  # algorithm announced a verdict on this history
        except _NextProbe as np_:
            v = np_.link
        key = info_state_from_statuses(
            g,
            {u: (LinkStatus.IDLE if flag else LinkStatus.BUSY) for u, flag in script.items()},
        )
        strategy[key] = v
        stack.append({**script, v: True})
        stack.append({**script, v: False})
    return strategy


@dataclass(frozen=True)
class ConjectureRow:
    q: float
    optimal_local: float
    unilat_exact: float
    gap: float


@dataclass(frozen=True)
class ConjectureReport:
    """Side-by-side comparison of the optimal local value and the exact
    unilateral-search cost; the gap is reported, never asserted, since the
    optimality conjecture is open."""

    k: int
    rows: tuple[ConjectureRow, ...]
    consistent: bool

    def to_csv(self) -> str:
        lines = ["k,q,optimal_local,unilat_exact,gap"]
        for r in self.rows:
            lines.append(
                f"{self.k},{r.q:.12g},{r.optimal_local:.12g},{r.unilat_exact:.12g},{r.gap:.12g}"
            )
        return "\n".join(lines) + "\n"


def conjecture_report(k: int, q_grid=None, *, max_links: int | None = None) -> ConjectureReport:
    """Compare optimal local search with unilateral search on F_k, k <= 2."""
    if k > 2:
        raise SizeLimitError(
            f"conjecture report is limited to k <= 2 (k={k} has 3**{2 * (2 ** (k + 1) - 2)} states)"
        )
    if q_grid is None:
        q_grid = np.linspace(0.0, 1.0, 11)
    g = build_fully_parallel(k)
    rows = []
    for q in q_grid:
        q = float(q)
        opt = optimal_expected_probes(g, q, LocalityMode.LOCAL_FORWARD, max_links=max_links)
        unilat = exact_cost_unilat(k, q)
        gap = unilat - opt.value
        if gap < -1e-9:
            raise InternalConsistencyError(
                f"DP value {opt.value} exceeds the algorithm's exact cost {unilat} at q={q}"
            )
        rows.append(ConjectureRow(q, opt.value, unilat, gap))
    consistent = all(abs(r.gap) <= 1e-9 for r in rows)
    return ConjectureReport(k, tuple(rows), consistent)
