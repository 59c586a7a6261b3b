"""In-memory property graph.

Shared substrate for the vulnerability knowledge graph and the program
call graph: labeled nodes with key/value properties, typed directed
edges, a label index, and edge-unique path enumeration. Mutation happens
in a single-threaded build phase; after seal() the graph is immutable
and reads are safe from any thread.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

#: Property values are one of: text, 64-bit integer, 64-bit float, or an
#: ordered list of non-empty strings.
PropertyValue = Union[str, int, float, list]


class GraphError(Exception):
    """Base class for graph-store errors."""


class GraphSealed(GraphError):
    """Mutation attempted on a sealed graph."""


class InvalidLabel(GraphError):
    """Node label is empty."""


class UnknownNode(GraphError):
    """An operation referenced a node id that does not exist."""


def values_equal(a: PropertyValue, b: PropertyValue) -> bool:
    """Property-value equality.

    Values of different kinds compare unequal, with one exception:
    comparing a scalar against a string list is membership. This keeps a
    single filter usable against catalogs that store one event name or
    many (e.g. a weakness with four trigger procedures).
    """
    a_list = isinstance(a, list)
    b_list = isinstance(b, list)
    if a_list and b_list:
        return a == b
    if a_list:
        return isinstance(b, str) and b in a
    if b_list:
        return isinstance(a, str) and a in b
    if type(a) is not type(b):
        return False
    return a == b


@dataclass(eq=False)
class Node:
    id: int
    label: str
    properties: dict


@dataclass(eq=False)
class Edge:
    id: int
    source: int
    target: int
    type: str
    properties: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Path:
    """A directed walk: len(edges) == len(nodes) - 1, no edge repeated."""

    nodes: tuple
    edges: tuple

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def start(self) -> int:
        return self.nodes[0]

    @property
    def end(self) -> int:
        return self.nodes[-1]


class PropertyGraph:
    """Labeled property graph with integer node/edge ids.

    Ids are opaque, unique, and stable; nodes are never deduplicated at
    this layer. All query results use deterministic orderings (ascending
    node id, lexicographic edge-id sequences) so downstream golden files
    are byte-stable.
    """

    def __init__(self) -> None:
        self._nodes: dict = {}
        self._edges: dict = {}
        self._by_label: dict = {}
        self._out: dict = {}
        self._in: dict = {}
        self._next_node_id = 1
        self._next_edge_id = 1
        self._sealed = False

    # -- mutation ----------------------------------------------------------

    def add_node(self, label: str, properties: Optional[dict] = None) -> int:
        if self._sealed:
            raise GraphSealed("graph is sealed")
        if not label:
            raise InvalidLabel("node label must be non-empty")
        node_id = self._next_node_id
        self._next_node_id += 1
        self._nodes[node_id] = Node(node_id, label, dict(properties or {}))
        self._by_label.setdefault(label, set()).add(node_id)
        self._out[node_id] = []
        self._in[node_id] = []
        return node_id

    def add_edge(self, source: int, target: int, edge_type: str) -> int:
        if self._sealed:
            raise GraphSealed("graph is sealed")
        if source not in self._nodes:
            raise UnknownNode(f"unknown source node {source}")
        if target not in self._nodes:
            raise UnknownNode(f"unknown target node {target}")
        if not edge_type:
            raise GraphError("edge type must be non-empty")
        edge_id = self._next_edge_id
        self._next_edge_id += 1
        self._edges[edge_id] = Edge(edge_id, source, target, edge_type)
        self._out[source].append(edge_id)
        self._in[target].append(edge_id)
        return edge_id

    def seal(self) -> None:
        """Freeze the graph. Idempotent; reads are unaffected."""
        self._sealed = True

    @property
    def sealed(self) -> bool:
        return self._sealed

    # -- lookup ------------------------------------------------------------

    def node(self, node_id: int) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNode(f"unknown node {node_id}") from None

    def edge(self, edge_id: int) -> Edge:
        return self._edges[edge_id]

    def has_node(self, node_id: int) -> bool:
        return node_id in self._nodes

    def nodes(self) -> Iterator[Node]:
        for node_id in sorted(self._nodes):
            yield self._nodes[node_id]

    def edges(self) -> Iterator[Edge]:
        for edge_id in sorted(self._edges):
            yield self._edges[edge_id]

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def out_edges(self, node_id: int) -> list:
        self.node(node_id)
        return [self._edges[e] for e in sorted(self._out[node_id])]

    def in_edges(self, node_id: int) -> list:
        self.node(node_id)
        return [self._edges[e] for e in sorted(self._in[node_id])]

    def find_nodes(self, label: str, filters: Optional[dict] = None) -> list:
        """All nodes with the given label whose properties satisfy every
        filter entry under values_equal. Ascending node-id order; an
        unknown label yields an empty list."""
        result = []
        for node_id in sorted(self._by_label.get(label, ())):
            node = self._nodes[node_id]
            if all(
                key in node.properties and values_equal(value, node.properties[key])
                for key, value in (filters or {}).items()
            ):
                result.append(node)
        return result

    # -- traversal ---------------------------------------------------------

    def enumerate_paths(
        self,
        start: int,
        targets: Iterable,
        edge_type: Optional[str] = None,
        min_len: int = 1,
        max_len: Optional[int] = None,
    ) -> list:
        """All directed paths from start ending at any target.

        Only edges of edge_type are followed (None = any type); no edge
        appears twice in one path; path length is within [min_len,
        max_len] (max_len None = unbounded). Results are ordered
        lexicographically by edge-id sequence.
        """
        self.node(start)
        target_set = set(targets)
        results = []
        node_seq = [start]
        edge_seq = []
        used = set()

        def walk(current: int) -> None:
            if len(edge_seq) >= min_len and current in target_set:
                results.append(Path(tuple(node_seq), tuple(edge_seq)))
            if max_len is not None and len(edge_seq) >= max_len:
                return
            for edge_id in sorted(self._out[current]):
                if edge_id in used:
                    continue
                edge = self._edges[edge_id]
                if edge_type is not None and edge.type != edge_type:
                    continue
                used.add(edge_id)
                edge_seq.append(edge_id)
                node_seq.append(edge.target)
                walk(edge.target)
                node_seq.pop()
                edge_seq.pop()
                used.discard(edge_id)

        if min_len == 0 and start in target_set:
            results.append(Path((start,), ()))
        walk(start)
        return results

    def is_valid_path(self, path: Path) -> bool:
        """Check contiguity, direction, and edge uniqueness of a path."""
        if len(path.nodes) != len(path.edges) + 1 or not path.nodes:
            return False
        if len(set(path.edges)) != len(path.edges):
            return False
        for k, edge_id in enumerate(path.edges):
            edge = self._edges.get(edge_id)
            if edge is None:
                return False
            if edge.source != path.nodes[k] or edge.target != path.nodes[k + 1]:
                return False
        return all(n in self._nodes for n in path.nodes)
