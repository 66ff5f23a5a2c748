import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chansearch import (
    ChannelGraph,
    GraphKind,
    SizeLimitError,
    build_fully_parallel,
    build_series_composition,
    count_st_paths,
    enumerate_st_paths,
    export_graph,
    import_graph,
    validate,
)


@pytest.mark.parametrize("k", range(0, 9))
def test_fully_parallel_counts(k):
    g = build_fully_parallel(k)
    assert g.n_links == 2 * (2 ** (k + 1) - 2)
    assert len(g.edges) == (2 * (2 ** (k + 1) - 2) + 2 ** k if k else 1)
    assert g.source == 0 and g.target == g.n_vertices - 1
    assert count_st_paths(g) == 2 ** k


def test_fully_parallel_degenerate():
    g = build_fully_parallel(0)
    assert g.n_vertices == 2 and g.n_links == 0
    assert [tuple(e) for e in g.edges] == [(0, 1)]


def test_f2_matches_figure():
    g = build_fully_parallel(2)
    assert g.n_links == 12
    assert sorted(set(int(r) for r in g.ranks)) == [0, 1, 2, 3, 4, 5]
    assert count_st_paths(g) == 4
    # one link of each rank 1..4 on every path
    for path in enumerate_st_paths(g):
        assert len(path) == 2 * 2 + 2
        assert [int(g.ranks[v]) for v in path] == [0, 1, 2, 3, 4, 5]


def test_f3_paths_by_enumeration():
    g = build_fully_parallel(3)
    assert g.n_links == 28
    paths = list(enumerate_st_paths(g))
    assert len(paths) == 8
    assert all(len(p) == 6 + 2 for p in paths)
    # links are partitioned one-per-rank along each path
    for p in paths:
        assert [int(g.ranks[v]) for v in p[1:-1]] == [1, 2, 3, 4, 5, 6]


@pytest.mark.parametrize("k", range(0, 13))
def test_path_count_power_of_two(k):
    g = build_fully_parallel(k)
    assert count_st_paths(g) == 2 ** k
    # every edge advances rank by one, so every s-t path crosses each of
    # ranks 1..2k exactly once: 2k links per path
    assert all(int(g.ranks[b]) == int(g.ranks[a]) + 1 for a, b in g.edges)


@pytest.mark.parametrize("k,n_links", [(0, 1), (1, 9), (2, 25)])
def test_series_composition_links(k, n_links):
    g = build_series_composition(k)
    assert g.n_links == n_links
    assert validate(g).ok
    assert g.middle_link is not None


def test_series_middle_is_cut():
    g = build_series_composition(2)
    u = g.middle_link
    assert all(u in path for path in enumerate_st_paths(g))
    # removing u disconnects source from target
    reach = {g.source}
    stack = [g.source]
    while stack:
        v = stack.pop()
        for w in g.out_adj[v]:
            if w != u and w not in reach:
                reach.add(w)
                stack.append(w)
    assert g.target not in reach


def test_builders_validate_clean():
    for k in range(0, 7):
        assert validate(build_fully_parallel(k)).ok
        assert validate(build_series_composition(k)).ok


def test_validate_isolated_vertex():
    g = ChannelGraph(4, [(0, 1), (1, 3)], 0, 3, [0, 1, 0, 2])
    report = validate(g)
    assert not report.ok
    assert any(v.code == "stranded" and 2 in v.vertices for v in report.violations)


def test_validate_cycle():
    g = ChannelGraph(4, [(0, 1), (1, 2), (2, 1), (2, 3)], 0, 3, [0] * 4)
    report = validate(g)
    assert not report.ok
    assert any(v.code == "cycle" for v in report.violations)


def test_validate_endpoint_degrees():
    g = ChannelGraph(3, [(0, 1), (1, 2), (1, 0)], 0, 2, [0, 1, 2])
    report = validate(g)
    assert any(v.code in ("source-indegree", "cycle") for v in report.violations)


def test_size_guard():
    with pytest.raises(SizeLimitError):
        build_fully_parallel(8, max_depth=7)
    with pytest.raises(SizeLimitError):
        build_series_composition(5, max_depth=4)
    with pytest.raises(ValueError):
        build_fully_parallel(-1)


def test_export_json_f0():
    doc = json.loads(export_graph(build_fully_parallel(0), "json"))
    assert doc == {
        "vertices": 2,
        "source": 0,
        "target": 1,
        "edges": [[0, 1]],
        "ranks": [0, 1],
        "kind": "FullyParallel(0)",
    }


def test_export_dot_f1():
    text = export_graph(build_fully_parallel(1), "dot")
    assert text.count("->") == 6  # 2 + 2 tree edges plus 2 cross edges
    assert text.count("[rank=") == 6
    for r in range(4):
        assert f"[rank={r}]" in text


def test_export_json_f2_counts():
    doc = json.loads(export_graph(build_fully_parallel(2), "json"))
    assert doc["vertices"] == 14
    assert len(doc["edges"]) == 16


def test_export_deterministic():
    a = export_graph(build_fully_parallel(3), "json")
    b = export_graph(build_fully_parallel(3), "json")
    assert a == b
    assert export_graph(build_fully_parallel(3), "dot") == export_graph(
        build_fully_parallel(3), "dot"
    )


def test_json_round_trip():
    g = build_fully_parallel(2)
    back = import_graph(export_graph(g, "json"))
    assert back.kind is GraphKind.FULLY_PARALLEL and back.k == 2
    assert np.array_equal(back.edges, g.edges)

    custom = ChannelGraph(3, [(0, 1), (1, 2)], 0, 2, [0, 1, 2])
    back = import_graph(export_graph(custom, "json"))
    assert back.kind is GraphKind.CUSTOM
    assert back.n_vertices == 3


def test_import_rejects_invalid():
    bad = json.dumps(
        {"vertices": 4, "source": 0, "target": 3, "edges": [[0, 1], [1, 3]], "ranks": [0, 1, 0, 2], "kind": "Custom"}
    )
    with pytest.raises(ValueError, match="not a valid channel graph"):
        import_graph(bad)


def test_export_unknown_format():
    with pytest.raises(ValueError):
        export_graph(build_fully_parallel(1), "xml")


@settings(max_examples=30, deadline=None)
@given(k=st.integers(min_value=0, max_value=7))
def test_build_validate_property(k):
    g = build_fully_parallel(k)
    assert validate(g).ok
    assert count_st_paths(g) == 2 ** k
    # ranks partition: 2**min(j, 2k+1-j) vertices at rank j
    ranks = [int(r) for r in g.ranks]
    for j in range(2 * k + 2):
        assert ranks.count(j) == 2 ** min(j, 2 * k + 1 - j)
