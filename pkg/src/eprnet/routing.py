"""Minimum-loss edge-disjoint route pairs from the source to node pairs.

Both photons of an entangled pair leave the generator together, so serving
the node pair (i, j) means finding two edge-disjoint directed paths in the
port-level loss graph: one from the generator to i's memory and one to j's
memory.  A joint minimum-total-loss pair of paths is found with Suurballe's
algorithm after funneling both memories into a shared dummy terminal with
zero-weight edges.

Infeasibility (no two edge-disjoint paths exist) is reported as a value,
not an exception, because source-placement sweeps probe many placements
and must survive the bad ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Hashable, Sequence

from .netgraph import RoutingGraph, gen_vertex, mem_vertex, transmittance

EdgeTriple = tuple[Hashable, Hashable, float]


class RoutingError(ValueError):
    """Raised for malformed routing queries (unknown nodes, bad graphs)."""


@dataclass(frozen=True)
class DisjointPair:
    """Two edge-disjoint paths (edge-id sequences) and their joint weight."""

    first: tuple[int, ...]
    second: tuple[int, ...]
    total_weight: float


@dataclass(frozen=True)
class RoutePlan:
    """Accepted light paths for one node pair, as loss-graph edge ids."""

    pair: tuple[str, str]
    path_a: tuple[int, ...]  # ends at mem(pair[0])
    path_b: tuple[int, ...]  # ends at mem(pair[1])
    total_loss_db: float
    eta: float


@dataclass(frozen=True)
class RouteTable:
    """Routes for every node pair of one source placement."""

    source: str
    plans: dict[tuple[str, str], RoutePlan]
    infeasible: tuple[tuple[str, str], ...]


def _dijkstra(
    adjacency: dict[Hashable, list[int]],
    edges: Sequence[EdgeTriple],
    start: Hashable,
) -> tuple[dict[Hashable, float], dict[Hashable, int]]:
    """Shortest distances and predecessor edge ids from ``start``.

    Deterministic: the heap orders ties by insertion counter, and edges
    are relaxed in id order, so reruns produce identical trees.
    """
    dist: dict[Hashable, float] = {start: 0.0}
    pred: dict[Hashable, int] = {}
    counter = 0
    heap: list[tuple[float, int, Hashable]] = [(0.0, counter, start)]
    done: set[Hashable] = set()
    while heap:
        d, _, u = heappop(heap)
        if u in done:
            continue
        done.add(u)
        for eid in adjacency.get(u, ()):
            _, head, weight = edges[eid][0], edges[eid][1], edges[eid][2]
            nd = d + weight
            if head not in dist or nd < dist[head]:
                dist[head] = nd
                pred[head] = eid
                counter += 1
                heappush(heap, (nd, counter, head))
    return dist, pred


def _backtrack(pred: dict[Hashable, int], edges: Sequence[EdgeTriple],
               start: Hashable, end: Hashable) -> list[int]:
    path: list[int] = []
    node = end
    while node != start:
        eid = pred[node]
        path.append(eid)
        node = edges[eid][0]
    path.reverse()
    return path


def suurballe_disjoint_pair(
    edges: Sequence[EdgeTriple],
    src: Hashable,
    dst: Hashable,
) -> DisjointPair | None:
    """Minimum-total-weight pair of edge-disjoint src->dst paths.

    Args:
        edges: directed multigraph as (tail, head, weight) triples with
            weight >= 0; the triple's position is its edge id.
        src: start vertex.
        dst: end vertex, distinct from ``src``.

    Returns:
        DisjointPair, or None when no two edge-disjoint paths exist.
        ``total_weight`` is the exactly-rounded sum (math.fsum) of both
        paths' original edge weights.

    The two Dijkstra passes and the interleaving splice use fixed tie
    rules, so equal-weight alternatives resolve deterministically.
    """
    if src == dst:
        raise RoutingError("src and dst must differ")
    for eid, (_, _, w) in enumerate(edges):
        if w < 0 or math.isnan(w):
            raise RoutingError(f"edge {eid} has invalid weight {w}")

    adjacency: dict[Hashable, list[int]] = {}
    for eid, (tail, _, _) in enumerate(edges):
        adjacency.setdefault(tail, []).append(eid)

    dist, pred = _dijkstra(adjacency, edges, src)
    if dst not in dist:
        return None
    first_path = _backtrack(pred, edges, src, dst)
    on_first = set(first_path)

    # Second pass on reduced costs, with first-path edges reversed.
    # Synthetic reversal ids live past the real range and map back to the
    # edge they undo.
    red_edges: list[EdgeTriple] = []
    red_ids: list[int] = []  # real edge id, or -(eid+1) for a reversal
    for eid, (tail, head, weight) in enumerate(edges):
        if eid in on_first:
            continue
        if tail not in dist or head not in dist:
            continue
        reduced = weight + dist[tail] - dist[head]
        red_edges.append((tail, head, max(0.0, reduced)))
        red_ids.append(eid)
    for eid in first_path:
        tail, head, _ = edges[eid]
        red_edges.append((head, tail, 0.0))
        red_ids.append(-(eid + 1))

    red_adj: dict[Hashable, list[int]] = {}
    for pos, (tail, _, _) in enumerate(red_edges):
        red_adj.setdefault(tail, []).append(pos)
    dist2, pred2 = _dijkstra(red_adj, red_edges, src)
    if dst not in dist2:
        return None
    second_raw = _backtrack(pred2, red_edges, src, dst)

    # Cancel first-path edges traversed backwards, keep the rest.
    combined = set(first_path)
    for pos in second_raw:
        marker = red_ids[pos]
        if marker < 0:
            combined.discard(-marker - 1)
        else:
            combined.add(marker)

    # Split the combined edge set into two paths by walking from src twice,
    # always taking the smallest available edge id.
    by_tail: dict[Hashable, list[int]] = {}
    for eid in sorted(combined):
        by_tail.setdefault(edges[eid][0], []).append(eid)
    paths: list[tuple[int, ...]] = []
    for _ in range(2):
        walk: list[int] = []
        node = src
        while node != dst:
            bucket = by_tail.get(node)
            if not bucket:
                raise RoutingError("internal error: disjoint-pair splice failed")
            eid = bucket.pop(0)
            walk.append(eid)
            node = edges[eid][1]
        paths.append(tuple(walk))
    total = math.fsum(edges[eid][2] for path in paths for eid in path)
    return DisjointPair(paths[0], paths[1], total)


def pair_route(graph: RoutingGraph, i: str, j: str) -> RoutePlan | None:
    """Joint minimum-loss disjoint light paths serving the pair (i, j).

    Returns None when the placement cannot serve the pair.  The source's
    own memory is a valid endpoint, reached directly from the generator.
    """
    if i == j:
        raise RoutingError("a pair needs two distinct nodes")
    vset = set(graph.vertices)
    for node in (i, j):
        if mem_vertex(node) not in vset:
            raise RoutingError(f"unknown node {node!r}")
    a, b = sorted((i, j))
    dummy = ("dummy",)
    edges: list[EdgeTriple] = [
        (e.tail, e.head, e.weight_db) for e in graph.edges
    ]
    edges.append((mem_vertex(a), dummy, 0.0))
    edges.append((mem_vertex(b), dummy, 0.0))

    result = suurballe_disjoint_pair(edges, gen_vertex(), dummy)
    if result is None:
        return None

    n_real = len(graph.edges)
    stripped: dict[Hashable, tuple[int, ...]] = {}
    for path in (result.first, result.second):
        if not path or path[-1] < n_real:
            raise RoutingError("internal error: path does not end at a memory")
        body = path[:-1]
        end_mem = edges[path[-1]][0]
        stripped[end_mem] = tuple(body)
    if set(stripped) != {mem_vertex(a), mem_vertex(b)}:
        raise RoutingError("internal error: paths must end at distinct memories")

    total = math.fsum(
        graph.edges[eid].weight_db for body in stripped.values() for eid in body
    )
    return RoutePlan(
        pair=(a, b),
        path_a=stripped[mem_vertex(a)],
        path_b=stripped[mem_vertex(b)],
        total_loss_db=total,
        eta=transmittance(total),
    )


def all_pair_routes(graph: RoutingGraph) -> RouteTable:
    """Route every unordered node pair; collect the unservable ones."""
    nodes = sorted({v[1] for v in graph.vertices if v[0] == "mem"})
    plans: dict[tuple[str, str], RoutePlan] = {}
    infeasible: list[tuple[str, str]] = []
    for ai in range(len(nodes)):
        for bi in range(ai + 1, len(nodes)):
            pair = (nodes[ai], nodes[bi])
            plan = pair_route(graph, *pair)
            if plan is None:
                infeasible.append(pair)
            else:
                plans[pair] = plan
    return RouteTable(graph.source, plans, tuple(infeasible))


def route_nodes(graph: RoutingGraph, path: Sequence[int]) -> list[str]:
    """Physical sites visited by a path, in order (source first)."""
    nodes = [graph.source]
    for eid in path:
        edge = graph.edges[eid]
        if edge.kind == "fiber":
            nodes.append(edge.head[1])
    return nodes
