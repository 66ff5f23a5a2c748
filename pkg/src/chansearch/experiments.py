"""Batch experiment driver: seeded Monte Carlo runs and parameter sweeps.

Trials are replicated with a vectorized engine that evaluates the
recursive search bottom-up over the half-graph decomposition for a whole
block of trials at once.  Per-trial randomness comes only from
(seed, trial index, link id), trials are aggregated with exact integer
sums in index order, and a fixed block size is used regardless of thread
count, so statistics and emitted files are byte-identical for any
``threads`` setting.

Two safety nets guard the fast path on every run: each trial's verdict is
cross-checked against an independent vectorized reachability pass, and a
leading sample of trials is re-executed through the enforcing probe
session with full certificate verification.
"""

from __future__ import annotations

import json
import math
import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .analytics import (
    blocking_probability,
    bound_global_upper,
    bound_local_lower,
    bound_local_upper,
    exact_cost_bilat,
    exact_cost_unilat,
)
from .errors import InternalConsistencyError
from .graphs import ChannelGraph, build_fully_parallel
from .search import ALGORITHMS, Verdict, allowed_modes, run_to_outcome
from .sessions import LocalityMode
from .states import _hash_grid53, idle_threshold

TRIAL_BLOCK = 25_000

DEFAULT_MODE = {
    "bilat": LocalityMode.GLOBAL,
    "unilat": LocalityMode.LOCAL_FORWARD,
}

CSV_COLUMNS = (
    "k,q,algo,mode,trials,seed,mean_probes,stderr,linked_freq,"
    "blocking_exact,exact_cost,bound_upper,bound_lower"
)


@dataclass(frozen=True)
class TrialStats:
    trials: int
    mean_probes: float
    stderr: float
    linked_freq: float
    min_probes: int
    max_probes: int
    seed: int


_GRID_CACHE: OrderedDict[tuple, np.ndarray] = OrderedDict()
_GRID_CACHE_BYTES = 0
_GRID_CACHE_BUDGET = 1_500_000_000
_GRID_LOCK = threading.Lock()


def _hash_block(seed: int, lo: int, hi: int, n_vertices: int) -> np.ndarray:
    """Per-block hash grid, cached: the grid is q- and algorithm-independent,
    so sweeps over (q, algo) at one (seed, k) pay for hashing once."""
    global _GRID_CACHE_BYTES
    key = (seed, lo, hi, n_vertices)
    with _GRID_LOCK:
        grid = _GRID_CACHE.get(key)
    if grid is not None:
        return grid
    trials = np.arange(lo, hi, dtype=np.uint64)
    links = np.arange(1, n_vertices - 1, dtype=np.uint64)
    grid = _hash_grid53(seed, trials, links)
    grid.setflags(write=False)
    with _GRID_LOCK:
        if key not in _GRID_CACHE:
            _GRID_CACHE[key] = grid
            _GRID_CACHE_BYTES += grid.nbytes
            while _GRID_CACHE_BYTES > _GRID_CACHE_BUDGET and _GRID_CACHE:
                _, evicted = _GRID_CACHE.popitem(last=False)
                _GRID_CACHE_BYTES -= evicted.nbytes
    return grid


def _simulate_block(
    g: ChannelGraph, q: float, algo: str, seed: int, lo: int, hi: int
) -> tuple[np.ndarray, np.ndarray]:
    """Probe counts and verdicts of `algo` on trials [lo, hi).

    Walks the half-graph decomposition from the leaf copies upward,
    combining (success, probe count) vectors exactly as the short-circuit
    recursion would probe: entry link, then (bilat) exit link before or
    (unilat) after the recursive call, second half only on failure.
    """
    k = g.k
    n = hi - lo
    idle = _hash_block(seed, lo, hi, g.n_vertices) < idle_threshold(q)

    def col(v: int) -> np.ndarray:
        return idle[:, v - 1]

    count_t = np.int16 if 2 * g.n_links < np.iinfo(np.int16).max else np.int32
    succ = np.ones((1 << k, n), dtype=bool)
    cnt = np.zeros((1 << k, n), dtype=count_t)
    for d in range(k - 1, -1, -1):
        m = 1 << d
        nsucc = np.empty((m, n), dtype=bool)
        ncnt = np.empty((m, n), dtype=count_t)
        for i in range(m):
            halves = []
            for c in (2 * i, 2 * i + 1):
                entry = col(g.forward_vertex(d + 1, c))
                exit_ = col(g.backward_vertex(d + 1, c))
                if algo == "bilat":
                    probes = 1 + entry * (1 + exit_ * cnt[c])
                    ok = entry & exit_ & succ[c]
                else:
                    probes = 1 + entry * (cnt[c] + succ[c])
                    ok = entry & succ[c] & exit_
                halves.append((probes, ok))
            (p1, s1), (p2, s2) = halves
            ncnt[i] = p1 + p2 * ~s1
            nsucc[i] = s1 | s2
        succ, cnt = nsucc, ncnt

    truth = _linked_truth(g, idle)
    if (truth != succ[0]).any():
        bad = int(np.nonzero(truth != succ[0])[0][0]) + lo
        raise InternalConsistencyError(f"verdict disagrees with reachability at trial {bad}")
    return cnt[0], succ[0]


def _linked_truth(g: ChannelGraph, idle: np.ndarray) -> np.ndarray:
    """Independent linkedness check: layered reachability over idle links."""
    k = g.k
    n = idle.shape[0]
    if k == 0:
        return np.ones(n, dtype=bool)

    def col(v: int) -> np.ndarray:
        return idle[:, v - 1]

    down = [col(g.forward_vertex(1, 0)), col(g.forward_vertex(1, 1))]
    for d in range(2, k + 1):
        down = [down[i // 2] & col(g.forward_vertex(d, i)) for i in range(1 << d)]
    up = [down[i] & col(g.backward_vertex(k, i)) for i in range(1 << k)]
    for d in range(k - 1, 0, -1):
        up = [(up[2 * i] | up[2 * i + 1]) & col(g.backward_vertex(d, i)) for i in range(1 << d)]
    return up[0] | up[1]


def run_monte_carlo(
    k: int,
    q: float,
    algo: str,
    mode: LocalityMode,
    trials: int,
    seed: int,
    threads: int = 1,
    *,
    verify_samples: int = 32,
) -> TrialStats:
    """Run seeded independent trials of one algorithm and aggregate.

    The first ``verify_samples`` trials are additionally replayed through
    an enforcing probe session; their certificates are verified and their
    probe counts compared against the vectorized engine.
    """
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}")
    if mode not in allowed_modes(algo):
        raise ValueError(f"mode {mode.value} is not permitted for {algo}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"vacancy probability q={q} outside [0, 1]")
    g = build_fully_parallel(k)

    blocks = [(lo, min(lo + TRIAL_BLOCK, trials)) for lo in range(0, trials, TRIAL_BLOCK)]

    def work(bounds: tuple[int, int]):
        lo, hi = bounds
        probes, linked = _simulate_block(g, q, algo, seed, lo, hi)
        p64 = probes.astype(np.int64)
        head = probes[: verify_samples - lo] if lo < verify_samples else None
        head_linked = linked[: verify_samples - lo] if lo < verify_samples else None
        return (
            int(p64.sum()),
            int((p64 * p64).sum()),
            int(linked.sum()),
            int(probes.min()),
            int(probes.max()),
            head,
            head_linked,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, blocks))
    else:
        results = [work(b) for b in blocks]

    total = sumsq = linked_count = 0
    mn, mx = None, None
    head_parts, head_linked_parts = [], []
    for s, s2, lc, bmin, bmax, head, hlink in results:  # fixed block order
        total += s
        sumsq += s2
        linked_count += lc
        mn = bmin if mn is None else min(mn, bmin)
        mx = bmax if mx is None else max(mx, bmax)
        if head is not None:
            head_parts.append(head)
            head_linked_parts.append(hlink)

    _verify_against_sessions(
        g, q, algo, mode, seed,
        np.concatenate(head_parts)[:verify_samples],
        np.concatenate(head_linked_parts)[:verify_samples],
        min(verify_samples, trials),
    )

    mean = total / trials
    var = (sumsq - total * total / trials) / (trials - 1) if trials > 1 else 0.0
    stderr = math.sqrt(max(var, 0.0) / trials)
    return TrialStats(trials, mean, stderr, linked_count / trials, mn, mx, seed)


def _verify_against_sessions(g, q, algo, mode, seed, head, head_linked, count):
    for t in range(count):
        outcome = run_to_outcome(g, q, seed, t, algo, mode)  # verifies certificates
        if outcome.probes != int(head[t]) or (
            (outcome.verdict is Verdict.LINKED) != bool(head_linked[t])
        ):
            raise InternalConsistencyError(
                f"vectorized engine disagrees with session execution at trial {t}"
            )


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def sweep(
    k_values: Sequence[int],
    q_values: Sequence[str | float],
    algos: Sequence[str],
    trials: int,
    seed: int,
    out: str | Path | None = None,
    *,
    threads: int = 1,
    fmt: str = "csv",
    mode: LocalityMode | None = None,
) -> str:
    """One row per (k, q, algo) with empirical and analytic columns.

    ``q_values`` given as strings are echoed verbatim in the output so
    rows remain greppable by the exact tokens the caller used.  The lower
    bound column is filled only for unilateral rows with 1/2 < q < 1.
    """
    if not k_values or not q_values or not algos:
        raise ValueError("sweep ranges must be nonempty")
    rows = []
    for k in k_values:
        for q_raw in q_values:
            q_str = q_raw if isinstance(q_raw, str) else _fmt(q_raw)
            q = float(q_str)
            for algo in algos:
                m = mode if mode is not None else DEFAULT_MODE[algo]
                stats = run_monte_carlo(k, q, algo, m, trials, seed, threads=threads)
                if algo == "bilat":
                    cost = exact_cost_bilat(k, q)
                    upper = bound_global_upper(k)
                else:
                    cost = exact_cost_unilat(k, q)
                    upper = bound_local_upper(k, q)
                lower = (
                    bound_local_lower(k, q)
                    if algo == "unilat" and k >= 1 and 0.5 < q < 1.0
                    else None
                )
                rows.append(
                    {
                        "k": k,
                        "q": q_str,
                        "algo": algo,
                        "mode": m.value,
                        "trials": trials,
                        "seed": seed,
                        "mean_probes": stats.mean_probes,
                        "stderr": stats.stderr,
                        "linked_freq": stats.linked_freq,
                        "blocking_exact": blocking_probability(k, q),
                        "exact_cost": cost,
                        "bound_upper": upper,
                        "bound_lower": lower,
                    }
                )

    if fmt == "csv":
        lines = [CSV_COLUMNS]
        for r in rows:
            lines.append(
                ",".join(
                    [
                        str(r["k"]),
                        r["q"],
                        r["algo"],
                        r["mode"],
                        str(r["trials"]),
                        str(r["seed"]),
                        _fmt(r["mean_probes"]),
                        _fmt(r["stderr"]),
                        _fmt(r["linked_freq"]),
                        _fmt(r["blocking_exact"]),
                        _fmt(r["exact_cost"]),
                        _fmt(r["bound_upper"]),
                        "" if r["bound_lower"] is None else _fmt(r["bound_lower"]),
                    ]
                )
            )
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        payload = [
            {key: (_fmt(val) if isinstance(val, float) else val) for key, val in r.items()}
            for r in rows
        ]
        text = json.dumps(payload, separators=(",", ":")) + "\n"
    else:
        raise ValueError(f"unknown sweep format {fmt!r}")

    if out is not None:
        Path(out).write_text(text, encoding="utf-8")
    return text
