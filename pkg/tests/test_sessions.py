import random

import pytest

from chansearch import (
    DuplicateProbeError,
    LinkStatus,
    LocalityMode,
    LocalityViolationError,
    ProbeSession,
    build_fully_parallel,
    replay_trace,
    sample_state,
    state_from_idle_links,
    trace_from_json,
    trace_to_json,
)
from chansearch.sessions import compute_accessible

MODES = (LocalityMode.LOCAL_FORWARD, LocalityMode.BILATERAL_LOCAL, LocalityMode.GLOBAL)


def _session(g, q, seed, trial, mode):
    return ProbeSession(g, sample_state(g, q, seed, trial), mode)


def test_fresh_session_counts(f2):
    sess = _session(f2, 0.5, 0, 0, LocalityMode.GLOBAL)
    assert sess.probe_count == 0
    assert sess.accessible_links() == set(f2.links)
    assert all(sess.revealed_status(v) is None for v in f2.links)


def test_fresh_accessible_sets(f1):
    lf = _session(f1, 0.5, 0, 0, LocalityMode.LOCAL_FORWARD)
    assert lf.accessible_links() == {1, 2}  # the two rank-1 links
    bl = _session(f1, 0.5, 0, 0, LocalityMode.BILATERAL_LOCAL)
    assert bl.accessible_links() == {1, 2, 3, 4}  # ranks 1 and 2


def test_forward_progression(f2):
    sess = _session(f2, 1.0, 0, 0, LocalityMode.LOCAL_FORWARD)
    assert sess.accessible_links() == {1, 2}
    sess.probe(1)
    assert sess.accessible_links() == {2, 3, 4}
    sess.probe(2)
    assert sess.accessible_links() == {3, 4, 5, 6}


def test_busy_link_blocks_subtree(f2):
    state = state_from_idle_links(f2, {v: v != 1 for v in f2.links})
    sess = ProbeSession(f2, state, LocalityMode.LOCAL_FORWARD)
    assert sess.probe(1) is LinkStatus.BUSY
    # 1 is busy: its children 3, 4 stay inaccessible
    assert sess.accessible_links() == {2}
    sess.probe(2)
    assert sess.accessible_links() == {5, 6}


def test_probe_errors(f1):
    sess = _session(f1, 1.0, 0, 0, LocalityMode.LOCAL_FORWARD)
    with pytest.raises(ValueError):
        sess.probe(f1.source)
    with pytest.raises(LocalityViolationError):
        sess.probe(3)  # rank-2 link before any idle path
    sess.probe(1)
    with pytest.raises(DuplicateProbeError):
        sess.probe(1)
    sess.probe(3)  # now accessible through idle link 1
    assert sess.probe_count == 2


def test_graph_state_mismatch(f1, f2):
    state = sample_state(f2, 0.5, 0, 0)
    with pytest.raises(ValueError):
        ProbeSession(f1, state, LocalityMode.GLOBAL)


def test_mode_monotonicity_and_incremental_soundness():
    # random probers; incremental accessibility must match a from-scratch
    # recomputation at every step, and modes must nest
    rng = random.Random(4)
    for _ in range(300):
        k = rng.choice((1, 2, 3))
        g = build_fully_parallel(k)
        q = rng.random()
        seed, trial = rng.randrange(2 ** 30), rng.randrange(100)
        mode = rng.choice(MODES)
        sess = ProbeSession(g, sample_state(g, q, seed, trial), mode)
        while True:
            acc = sess.accessible_links()
            snapshot = sess.revealed_snapshot()
            assert acc == compute_accessible(g, snapshot, mode)
            lf = compute_accessible(g, snapshot, LocalityMode.LOCAL_FORWARD)
            bl = compute_accessible(g, snapshot, LocalityMode.BILATERAL_LOCAL)
            gl = compute_accessible(g, snapshot, LocalityMode.GLOBAL)
            assert lf <= bl <= gl
            if not acc:
                break
            sess.probe(rng.choice(sorted(acc)))
        # every link eventually probed in global mode only
        if mode is LocalityMode.GLOBAL:
            assert sess.probe_count == g.n_links


def test_trace_replay_and_json(f2):
    state = sample_state(f2, 0.6, 21, 3)
    sess = ProbeSession(f2, state, LocalityMode.GLOBAL)
    for v in (1, 2, 4, 7):
        sess.probe(v)
    text = trace_to_json(sess.trace)
    back = trace_from_json(text)
    assert back == sess.trace
    regenerated = sample_state(f2, 0.6, 21, 3)
    assert replay_trace(f2, regenerated, back)
    # a tampered trace fails replay
    v0, st0 = back[0]
    flipped = LinkStatus.BUSY if st0 is LinkStatus.IDLE else LinkStatus.IDLE
    assert not replay_trace(f2, regenerated, [(v0, flipped)] + back[1:])
