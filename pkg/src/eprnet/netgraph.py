"""Physical fiber topologies and the directed port-level loss graph.

A physical topology is an undirected graph of sites joined by fiber links.
For a chosen source site the topology expands into a directed graph whose
vertices are switch ports and quantum memories:

* ``("gen",)`` - the photon-pair generator, colocated with the source;
* ``("mem", i)`` - node i's quantum memory, where photons terminate;
* ``("in", i, j)`` - node i's input port for the fiber arriving from j;
* ``("out", i, j)`` - node i's output port for the fiber departing to j.

Edge weights are losses in dB, so shortest paths are minimum-loss routes.
Every photon leaving a node traverses two wavelength-selective switches
(one demux, one mux), while a photon dropped into the local memory passes
only one; fiber spans lose ``fiber_loss_db_per_km`` per km.  The source
never relays foreign photons, so it has no input ports and no fiber edge
points toward it; consequently consumer output ports facing the source are
never created (they could carry no traffic).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

Vertex = tuple
_ALLOWED_TOP_KEYS = {"name", "nodes", "links", "provenance"}
_ALLOWED_NODE_KEYS = {"id", "x_km", "y_km"}
_ALLOWED_LINK_KEYS = {"a", "b", "distance_km"}
_BUNDLED = ("simple6", "ilec17")


class TopologyError(ValueError):
    """Raised for malformed topology documents or invalid queries."""


@dataclass(frozen=True)
class Node:
    id: str
    x_km: float | None = None
    y_km: float | None = None


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    distance_km: float | None = None


@dataclass(frozen=True)
class LossParams:
    """Loss model constants, all in dB."""

    fiber_loss_db_per_km: float = 0.4
    wss_loss_db: float = 8.0

    def __post_init__(self) -> None:
        if self.fiber_loss_db_per_km < 0:
            raise ValueError(
                f"fiber_loss_db_per_km must be >= 0, got {self.fiber_loss_db_per_km}"
            )
        if self.wss_loss_db < 0:
            raise ValueError(f"wss_loss_db must be >= 0, got {self.wss_loss_db}")


@dataclass(frozen=True)
class PhysicalTopology:
    """Undirected fiber network of named sites."""

    name: str
    nodes: tuple[Node, ...]
    links: tuple[Link, ...]

    def __post_init__(self) -> None:
        ids = [n.id for n in self.nodes]
        if len(ids) != len(set(ids)):
            raise TopologyError(f"duplicate node ids in topology {self.name!r}")
        id_set = set(ids)
        seen = set()
        linked = set()
        for link in self.links:
            if link.a not in id_set or link.b not in id_set:
                raise TopologyError(
                    f"link {link.a}-{link.b} references unknown node"
                )
            if link.a == link.b:
                raise TopologyError(f"self-link at node {link.a}")
            key = frozenset((link.a, link.b))
            if key in seen:
                raise TopologyError(f"duplicate link {link.a}-{link.b}")
            seen.add(key)
            linked.update(key)
            if link.distance_km is not None and not link.distance_km > 0:
                raise TopologyError(
                    f"link {link.a}-{link.b} distance must be > 0, got {link.distance_km}"
                )
        if len(self.nodes) > 1:
            isolated = sorted(id_set - linked)
            if isolated:
                raise TopologyError(f"isolated nodes: {', '.join(isolated)}")

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(sorted(n.id for n in self.nodes))

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise TopologyError(f"unknown node {node_id!r}")

    def neighbors(self, node_id: str) -> tuple[str, ...]:
        self.node(node_id)
        out = set()
        for link in self.links:
            if link.a == node_id:
                out.add(link.b)
            elif link.b == node_id:
                out.add(link.a)
        return tuple(sorted(out))

    def degree(self, node_id: str) -> int:
        return len(self.neighbors(node_id))


def _require_keys(obj: dict, allowed: set[str], required: Iterable[str], what: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise TopologyError(f"unknown {what} keys: {', '.join(sorted(unknown))}")
    for key in required:
        if key not in obj:
            raise TopologyError(f"{what} missing required key {key!r}")


def topology_from_dict(doc: dict[str, Any]) -> PhysicalTopology:
    """Build and validate a topology from a parsed JSON document.

    Accepted schema: top-level ``name``, ``nodes`` (objects with ``id``
    and optional ``x_km``/``y_km``), ``links`` (objects with ``a``, ``b``
    and optional ``distance_km``), plus an optional free-text
    ``provenance`` note.  Anything else is rejected.
    """
    if not isinstance(doc, dict):
        raise TopologyError("topology document must be a JSON object")
    _require_keys(doc, _ALLOWED_TOP_KEYS, ("name", "nodes", "links"), "topology")
    nodes = []
    for entry in doc["nodes"]:
        if not isinstance(entry, dict):
            raise TopologyError("node entries must be objects")
        _require_keys(entry, _ALLOWED_NODE_KEYS, ("id",), "node")
        nodes.append(Node(str(entry["id"]), entry.get("x_km"), entry.get("y_km")))
    links = []
    for entry in doc["links"]:
        if not isinstance(entry, dict):
            raise TopologyError("link entries must be objects")
        _require_keys(entry, _ALLOWED_LINK_KEYS, ("a", "b"), "link")
        links.append(Link(str(entry["a"]), str(entry["b"]), entry.get("distance_km")))
    return PhysicalTopology(str(doc["name"]), tuple(nodes), tuple(links))


def load_topology(path: str | Path) -> PhysicalTopology:
    """Load a topology JSON file; bare bundled names are resolved too."""
    name = str(path)
    if name in _BUNDLED and not Path(name).exists():
        return bundled_topology(name)
    with open(path, "r", encoding="utf-8") as fh:
        return topology_from_dict(json.load(fh))


def bundled_topology(name: str) -> PhysicalTopology:
    """Load one of the topologies shipped with the package."""
    if name not in _BUNDLED:
        raise TopologyError(
            f"unknown bundled topology {name!r}; available: {', '.join(_BUNDLED)}"
        )
    text = resources.files("eprnet.data").joinpath(f"{name}.json").read_text("utf-8")
    return topology_from_dict(json.loads(text))


def link_distance(topology: PhysicalTopology, a: str, b: str) -> float:
    """Length in km of the link between a and b.

    An explicitly stored distance wins; otherwise the Euclidean distance
    between node coordinates is used.
    """
    for link in topology.links:
        if {link.a, link.b} == {a, b}:
            if link.distance_km is not None:
                return link.distance_km
            na, nb = topology.node(a), topology.node(b)
            if None in (na.x_km, na.y_km, nb.x_km, nb.y_km):
                raise TopologyError(
                    f"link {a}-{b} has no distance and endpoint coordinates are incomplete"
                )
            return math.hypot(na.x_km - nb.x_km, na.y_km - nb.y_km)
    raise TopologyError(f"no link between {a!r} and {b!r}")


def transmittance(loss_db: float) -> float:
    """Convert a loss in dB to a power/probability transmittance."""
    if loss_db < 0:
        raise ValueError(f"loss must be >= 0 dB, got {loss_db}")
    return 10.0 ** (-loss_db / 10.0)


def gen_vertex() -> Vertex:
    return ("gen",)


def mem_vertex(node_id: str) -> Vertex:
    return ("mem", node_id)


def in_port(node_id: str, neighbor_id: str) -> Vertex:
    return ("in", node_id, neighbor_id)


def out_port(node_id: str, neighbor_id: str) -> Vertex:
    return ("out", node_id, neighbor_id)


@dataclass(frozen=True)
class GraphEdge:
    """One directed loss edge; ``kind`` names the physical element.

    fiber: a fiber span (weight = fiber loss/km * distance)
    transit: through two switches (generator launch or node pass-through)
    drop: through one switch into a memory
    """

    tail: Vertex
    head: Vertex
    weight_db: float
    kind: str


@dataclass(frozen=True)
class RoutingGraph:
    """Directed port-level loss graph for one source placement."""

    source: str
    vertices: tuple[Vertex, ...]
    edges: tuple[GraphEdge, ...]

    def out_adjacency(self) -> dict[Vertex, list[int]]:
        adj: dict[Vertex, list[int]] = {v: [] for v in self.vertices}
        for idx, edge in enumerate(self.edges):
            adj[edge.tail].append(idx)
        return adj


def build_routing_graph(
    topology: PhysicalTopology,
    source: str,
    loss: LossParams,
    *,
    exclude_u_turns: bool = False,
) -> RoutingGraph:
    """Expand a topology into the directed loss graph for one source.

    Args:
        topology: physical fiber network.
        source: id of the site hosting the generator.
        loss: loss model constants.
        exclude_u_turns: when True, omit pass-through edges that send a
            photon back out on the fiber it arrived from.  They are kept
            by default; route disjointness makes them harmless.

    Returns:
        RoutingGraph with deterministic vertex and edge ordering.
    """
    topology.node(source)
    node_ids = topology.node_ids
    consumers = [n for n in node_ids if n != source]

    vertices: list[Vertex] = [gen_vertex()]
    vertices.extend(mem_vertex(n) for n in node_ids)
    for i in consumers:
        vertices.extend(in_port(i, j) for j in topology.neighbors(i))
    # Output ports exist only where the outgoing fiber exists; fibers never
    # point at the source, so ports facing it are omitted everywhere.
    for i in node_ids:
        vertices.extend(
            out_port(i, j) for j in topology.neighbors(i) if j != source
        )

    edges: list[GraphEdge] = []
    wss = loss.wss_loss_db
    for link in sorted(topology.links, key=lambda l: tuple(sorted((l.a, l.b)))):
        dist = link_distance(topology, link.a, link.b)
        fiber_db = loss.fiber_loss_db_per_km * dist
        for tail_node, head_node in ((link.a, link.b), (link.b, link.a)):
            if head_node == source:
                continue
            edges.append(
                GraphEdge(out_port(tail_node, head_node),
                          in_port(head_node, tail_node), fiber_db, "fiber")
            )
    for i in consumers:
        nbrs = topology.neighbors(i)
        for j in nbrs:
            for k in nbrs:
                if k == source or (exclude_u_turns and j == k):
                    continue
                edges.append(
                    GraphEdge(in_port(i, j), out_port(i, k), 2 * wss, "transit")
                )
        for j in nbrs:
            edges.append(GraphEdge(in_port(i, j), mem_vertex(i), wss, "drop"))
    for j in topology.neighbors(source):
        edges.append(GraphEdge(gen_vertex(), out_port(source, j), 2 * wss, "transit"))
    edges.append(GraphEdge(gen_vertex(), mem_vertex(source), wss, "drop"))

    return RoutingGraph(source, tuple(vertices), tuple(edges))
