"""The two recursive path-search algorithms for fully parallel graphs.

Both algorithms decompose a depth-``m`` fully parallel graph into its two
depth-``m-1`` halves and try them in the builder's canonical order, using
short-circuiting conjunctions:

* ``bilat_search`` probes a half's entry link, then its exit link, then
  recurses.  It touches only links with an idle path from the source or
  to the target, so it runs under global or bilateral-local sessions.
* ``unilat_search`` probes the entry link, recurses, and probes the exit
  link only after the recursion has established an idle path to it, which
  keeps every probe forward-local.

Outcomes carry a verifiable certificate: the revealed idle path for a
linked verdict, or a greedily minimized set of revealed busy links that
jointly separate source from target for a blocked verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import json

from .errors import InternalConsistencyError
from .graphs import ChannelGraph, GraphKind
from .sessions import LocalityMode, ProbeSession
from .states import (
    LinkStatus,
    is_linked,
    sample_state,
    verify_cut_certificate,
    verify_path_certificate,
)


class Verdict(Enum):
    LINKED = "linked"
    BLOCKED = "blocked"


@dataclass(frozen=True)
class SearchOutcome:
    verdict: Verdict
    certificate: tuple[int, ...] | frozenset[int]
    probes: int
    trace: tuple[tuple[int, LinkStatus], ...]


def _require_parallel(sess) -> ChannelGraph:
    g = sess.graph
    if g.kind is not GraphKind.FULLY_PARALLEL:
        raise ValueError("search algorithms accept fully parallel graphs only")
    return g


def _probe_idle(sess, v: int) -> bool:
    return sess.probe(v) is LinkStatus.IDLE


def _bilat(sess, g: ChannelGraph, depth: int, pos: int) -> bool:
    if depth == g.k:
        return True
    for child in (2 * pos, 2 * pos + 1):
        entry = g.forward_vertex(depth + 1, child)
        exit_ = g.backward_vertex(depth + 1, child)
        if _probe_idle(sess, entry) and _probe_idle(sess, exit_) and _bilat(sess, g, depth + 1, child):
            return True
    return False


def _unilat(sess, g: ChannelGraph, depth: int, pos: int) -> bool:
    if depth == g.k:
        return True
    for child in (2 * pos, 2 * pos + 1):
        entry = g.forward_vertex(depth + 1, child)
        exit_ = g.backward_vertex(depth + 1, child)
        if _probe_idle(sess, entry) and _unilat(sess, g, depth + 1, child) and _probe_idle(sess, exit_):
            return True
    return False


def bilat_search(sess) -> SearchOutcome:
    """Bilateral depth-first search; global or bilateral-local sessions."""
    g = _require_parallel(sess)
    if getattr(sess, "mode", LocalityMode.GLOBAL) is LocalityMode.LOCAL_FORWARD:
        raise ValueError("bilat_search probes exit links early; it is not forward-local")
    linked = _bilat(sess, g, 0, 0)
    return assemble_outcome(g, sess.trace, linked)


def unilat_search(sess) -> SearchOutcome:
    """Unilateral depth-first search; valid under any locality mode."""
    g = _require_parallel(sess)
    linked = _unilat(sess, g, 0, 0)
    return assemble_outcome(g, sess.trace, linked)


ALGORITHMS = {"bilat": bilat_search, "unilat": unilat_search}

_ALGO_MODES = {
    "bilat": (LocalityMode.GLOBAL, LocalityMode.BILATERAL_LOCAL),
    "unilat": (LocalityMode.GLOBAL, LocalityMode.BILATERAL_LOCAL, LocalityMode.LOCAL_FORWARD),
}


def allowed_modes(algo: str) -> tuple[LocalityMode, ...]:
    try:
        return _ALGO_MODES[algo]
    except KeyError:
        raise ValueError(f"unknown algorithm {algo!r}") from None


def assemble_outcome(g: ChannelGraph, trace, linked: bool) -> SearchOutcome:
    """Build the verified certificate from the probe trace alone."""
    trace = tuple(trace)
    if linked:
        certificate: tuple[int, ...] | frozenset[int] = _idle_path_from_trace(g, trace)
    else:
        certificate = _minimized_busy_cut(g, trace)
    verdict = Verdict.LINKED if linked else Verdict.BLOCKED
    return SearchOutcome(verdict, certificate, len(trace), trace)


def _idle_path_from_trace(g: ChannelGraph, trace) -> tuple[int, ...]:
    idle = {v for v, st in trace if st is LinkStatus.IDLE}
    parent: dict[int, int] = {g.source: -1}
    queue = [g.source]
    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        if v == g.target:
            path = [v]
            while parent[path[-1]] != -1:
                path.append(parent[path[-1]])
            return tuple(reversed(path))
        for w in g.out_adj[v]:
            if w not in parent and (w == g.target or w in idle):
                parent[w] = v
                queue.append(w)
    raise InternalConsistencyError("linked verdict but no revealed idle path")


def _minimized_busy_cut(g: ChannelGraph, trace) -> frozenset[int]:
    cut = {v for v, st in trace if st is LinkStatus.BUSY}
    if _connects(g, cut):
        raise InternalConsistencyError("blocked verdict but revealed busy links do not cut")
    for v in sorted(cut):
        if not _connects(g, cut - {v}):
            cut.remove(v)
    return frozenset(cut)


def _connects(g: ChannelGraph, removed: set[int]) -> bool:
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


def run_to_outcome(
    g: ChannelGraph,
    q: float,
    seed: int,
    trial_index: int,
    algo: str,
    mode: LocalityMode,
) -> SearchOutcome:
    """Sample a state, run one algorithm under enforcement, verify the result.

    The outcome's verdict is checked against ground truth and its
    certificate is independently verified before returning; a failure is
    an InternalConsistencyError and must never occur.
    """
    if mode not in allowed_modes(algo):
        raise ValueError(f"mode {mode.value} is not permitted for {algo}")
    state = sample_state(g, q, seed, trial_index)
    sess = ProbeSession(g, state, mode)
    outcome = ALGORITHMS[algo](sess)
    truth = is_linked(g, state)
    if (outcome.verdict is Verdict.LINKED) != truth:
        raise InternalConsistencyError(
            f"verdict {outcome.verdict.value} disagrees with ground truth (trial {trial_index})"
        )
    if outcome.verdict is Verdict.LINKED:
        ok = verify_path_certificate(g, state, outcome.certificate)
    else:
        ok = verify_cut_certificate(g, state, outcome.certificate)
    if not ok:
        raise InternalConsistencyError(f"certificate failed verification (trial {trial_index})")
    return outcome


def outcome_to_json(outcome: SearchOutcome) -> str:
    cert = (
        list(outcome.certificate)
        if isinstance(outcome.certificate, tuple)
        else sorted(outcome.certificate)
    )
    return json.dumps(
        {
            "verdict": outcome.verdict.value,
            "certificate": cert,
            "probes": outcome.probes,
            "trace": [{"link": v, "status": st.value} for v, st in outcome.trace],
        },
        separators=(",", ":"),
    )
