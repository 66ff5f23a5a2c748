"""Tour of the channel-graph builders.

Builds the fully parallel family and its series composition, shows the
rank layout, and round-trips a graph through the JSON schema.
"""

from chansearch import (
    build_fully_parallel,
    build_series_composition,
    count_st_paths,
    enumerate_st_paths,
    export_graph,
    import_graph,
    validate,
)


def main() -> None:
    print("Fully parallel graphs")
    print("=" * 60)
    print(f"{'k':>3} {'vertices':>9} {'links':>6} {'edges':>6} {'s-t paths':>10}")
    for k in range(0, 7):
        g = build_fully_parallel(k)
        assert validate(g).ok
        print(f"{k:>3} {g.n_vertices:>9} {g.n_links:>6} {len(g.edges):>6} {count_st_paths(g):>10}")

    g = build_fully_parallel(2)
    print("\nRank layout of the depth-2 graph (every path hits ranks 1..4):")
    by_rank = {}
    for v in range(g.n_vertices):
        by_rank.setdefault(int(g.ranks[v]), []).append(v)
    for rank in sorted(by_rank):
        print(f"  rank {rank}: vertices {by_rank[rank]}")
    print("  paths:", [list(p) for p in enumerate_st_paths(g)])

    print("\nSeries composition (two copies joined through the middle link u)")
    print("=" * 60)
    for k in range(0, 4):
        s = build_series_composition(k)
        print(f"  k={k}: {s.n_links} links, middle link u = vertex {s.middle_link}")
    s = build_series_composition(2)
    on_all = all(s.middle_link in p for p in enumerate_st_paths(s))
    print(f"  u lies on every source-target path: {on_all}")

    print("\nJSON round trip")
    print("=" * 60)
    text = export_graph(build_fully_parallel(1), "json")
    print(" ", text.strip())
    back = import_graph(text)
    print(f"  reimported: {back}")
    print("\nDOT output for the depth-1 graph:")
    print(export_graph(build_fully_parallel(1), "dot"))


if __name__ == "__main__":
    main()
