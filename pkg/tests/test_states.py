import math

import numpy as np
import pytest

from chansearch import (
    LinkStatus,
    blocking_probability,
    build_fully_parallel,
    busy_frontier_cut,
    is_linked,
    sample_state,
    state_from_idle_links,
    verify_cut_certificate,
    verify_path_certificate,
)
from chansearch.experiments import _hash_block
from chansearch.states import idle_threshold, link_idle_grid, link_uniform_grid


def test_degenerate_probabilities(f2):
    all_idle = sample_state(f2, 1.0, 0, 0)
    assert all(all_idle.status(v) is LinkStatus.IDLE for v in f2.links)
    all_busy = sample_state(f2, 0.0, 0, 0)
    assert all(all_busy.status(v) is LinkStatus.BUSY for v in f2.links)


def test_q_domain(f2):
    with pytest.raises(ValueError):
        sample_state(f2, 1.5, 0, 0)
    with pytest.raises(ValueError):
        sample_state(f2, -0.1, 0, 0)


def test_status_only_for_links(f2):
    state = sample_state(f2, 0.5, 0, 0)
    with pytest.raises(ValueError):
        state.status(f2.source)
    with pytest.raises(ValueError):
        state.status(f2.target)
    assert set(state.statuses) == set(f2.links)


def test_idle_fraction_binomial(f2):
    # 1e5 trials x 12 links at q = 0.5: fraction within 4 sigma
    n = 10 ** 5
    links = np.asarray(f2.links, dtype=np.uint64)
    idle = link_idle_grid(7, np.arange(n, dtype=np.uint64), links, 0.5)
    frac = idle.mean()
    sigma = math.sqrt(0.25 / (n * len(links)))
    assert abs(frac - 0.5) <= 4 * sigma


def test_idle_grid_matches_uniform_grid(f2):
    trials = np.arange(500, dtype=np.uint64)
    links = np.asarray(f2.links, dtype=np.uint64)
    for q in (0.0, 0.3, 0.5, 1 / math.sqrt(2), 0.999, 1.0):
        fast = link_idle_grid(3, trials, links, q)
        slow = link_uniform_grid(3, trials, links) < q
        assert (fast == slow).all()


def test_bit_identical_resampling(f2):
    a = sample_state(f2, 0.37, seed=99, trial_index=5)
    b = sample_state(f2, 0.37, seed=99, trial_index=5)
    assert (a.idle_mask == b.idle_mask).all()
    c = sample_state(f2, 0.37, seed=99, trial_index=6)
    assert (a.idle_mask != c.idle_mask).any()


def test_trial_streams_order_insensitive(f2):
    # trial 5's state doesn't depend on whether other trials were sampled
    before = sample_state(f2, 0.5, 11, 5).idle_mask.copy()
    for t in (0, 9, 2):
        sample_state(f2, 0.5, 11, t)
    assert (sample_state(f2, 0.5, 11, 5).idle_mask == before).all()


def test_is_linked_hand_case(f1):
    # exactly the two links of one branch idle -> linked
    links = sorted(f1.links)  # [1, 2, 3, 4]; branch A is 1 -> 3
    state = state_from_idle_links(f1, {1: True, 3: True, 2: False, 4: False})
    assert is_linked(f1, state)
    state = state_from_idle_links(f1, {1: True, 4: True, 2: False, 3: False})
    assert not is_linked(f1, state)
    assert links == [1, 2, 3, 4]


def test_path_certificate_cases(f1):
    f0 = build_fully_parallel(0)
    empty = state_from_idle_links(f0, {})
    assert verify_path_certificate(f0, empty, [f0.source, f0.target])

    all_idle = state_from_idle_links(f1, {v: True for v in f1.links})
    assert verify_path_certificate(f1, all_idle, [0, 1, 3, 5])
    assert not verify_path_certificate(f1, all_idle, [0, 3, 5])  # skips an edge
    assert not verify_path_certificate(f1, all_idle, [0, 1, 3])  # not at target
    one_busy = state_from_idle_links(f1, {1: True, 3: False, 2: True, 4: True})
    assert not verify_path_certificate(f1, one_busy, [0, 1, 3, 5])


def test_cut_certificate_cases(f1):
    all_busy = state_from_idle_links(f1, {v: False for v in f1.links})
    assert verify_cut_certificate(f1, all_busy, {1, 2})
    assert not verify_cut_certificate(f1, all_busy, {1})  # does not separate
    half = state_from_idle_links(f1, {1: True, 2: False, 3: False, 4: False})
    assert not verify_cut_certificate(f1, half, {1, 2})  # member 1 is idle
    assert verify_cut_certificate(f1, half, {3, 2})
    assert not verify_cut_certificate(f1, all_busy, {0, 1})  # 0 is not a link
    assert not verify_cut_certificate(f1, all_busy, set())


@pytest.mark.parametrize("k", [1, 2])
def test_linked_blocked_dichotomy_exhaustive(k):
    g = build_fully_parallel(k)
    n = g.n_links
    for bits in range(1 << n):
        idle = np.array([(bits >> i) & 1 for i in range(n)], dtype=bool)
        state = state_from_idle_links(g, idle)
        linked = is_linked(g, state)
        cut = busy_frontier_cut(g, state)
        if linked:
            # a busy cut cannot exist: some all-idle path dodges every busy set
            assert not verify_cut_certificate(g, state, cut)
        else:
            assert verify_cut_certificate(g, state, cut)


def test_monte_carlo_linked_frequency_matches_blocking():
    n = 10 ** 5
    for k in (3, 6, 8):
        g = build_fully_parallel(k)
        grid = _hash_block(5, 0, n, g.n_vertices)  # one hash pass, four thresholds
        for q in (0.25, 0.5, 0.75, 0.9):
            idle = grid < idle_threshold(q)
            # layered reachability, vectorized over trials
            freq = _linked_fraction(g, idle)
            p_block = blocking_probability(k, q)
            tol = 4 * math.sqrt(max(p_block * (1 - p_block), 1e-12) / n)
            assert abs(freq - (1 - p_block)) <= tol, (k, q)


def _linked_fraction(g, idle):
    k = g.k
    col = lambda v: idle[:, v - 1]
    down = [col(g.forward_vertex(1, 0)), col(g.forward_vertex(1, 1))]
    for d in range(2, k + 1):
        down = [down[i // 2] & col(g.forward_vertex(d, i)) for i in range(1 << d)]
    up = [down[i] & col(g.backward_vertex(k, i)) for i in range(1 << k)]
    for d in range(k - 1, 0, -1):
        up = [(up[2 * i] | up[2 * i + 1]) & col(g.backward_vertex(d, i)) for i in range(1 << d)]
    return float((up[0] | up[1]).mean())
