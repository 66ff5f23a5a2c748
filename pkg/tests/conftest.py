"""Shared fixtures: small graphs and exhaustive state-enumeration oracles.

The enumeration oracle runs every algorithm once per state (probe counts do
not depend on q) so expectations at any q are exact weighted sums; it is the
independent route against which the closed-form recurrences are checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from chansearch import (
    LocalityMode,
    bilat_search,
    build_fully_parallel,
    is_linked,
    state_from_idle_links,
    unilat_search,
)
from chansearch.sessions import ProbeSession


@dataclass
class EnumerationOracle:
    graph: object
    linked: np.ndarray  # bool per state bitmask
    popcount: np.ndarray
    probes: dict  # algo -> int array per state bitmask

    def weights(self, q: float) -> np.ndarray:
        n_links = self.graph.n_links
        return q ** self.popcount * (1.0 - q) ** (n_links - self.popcount)

    def blocking(self, q: float) -> float:
        return float(np.dot(self.weights(q), ~self.linked))

    def expected_probes(self, algo: str, q: float) -> float:
        return float(np.dot(self.weights(q), self.probes[algo]))


_ORACLE_MODES = {
    "bilat": LocalityMode.BILATERAL_LOCAL,
    "unilat": LocalityMode.LOCAL_FORWARD,
}


def _build_oracle(k: int) -> EnumerationOracle:
    g = build_fully_parallel(k)
    n = g.n_links
    size = 1 << n
    linked = np.zeros(size, dtype=bool)
    popcount = np.zeros(size, dtype=np.int64)
    probes = {"bilat": np.zeros(size, dtype=np.int64), "unilat": np.zeros(size, dtype=np.int64)}
    for bits in range(size):
        idle = np.array([(bits >> i) & 1 for i in range(n)], dtype=bool)
        state = state_from_idle_links(g, idle)
        linked[bits] = is_linked(g, state)
        popcount[bits] = int(idle.sum())
        for algo, fn in (("bilat", bilat_search), ("unilat", unilat_search)):
            out = fn(ProbeSession(g, state, _ORACLE_MODES[algo]))
            probes[algo][bits] = out.probes
    return EnumerationOracle(g, linked, popcount, probes)


@pytest.fixture(scope="session")
def oracle_f1() -> EnumerationOracle:
    return _build_oracle(1)


@pytest.fixture(scope="session")
def oracle_f2() -> EnumerationOracle:
    return _build_oracle(2)


@pytest.fixture(scope="session")
def f1():
    return build_fully_parallel(1)


@pytest.fixture(scope="session")
def f2():
    return build_fully_parallel(2)


@pytest.fixture(scope="session")
def f3():
    return build_fully_parallel(3)
