"""Topological scene maps: construction, BFS path queries, and persistence.

A scene is an undirected unit-weight graph whose nodes are viewpoints, each
carrying a 360-degree panorama reference and a 3-D position in meters. Maps
are built from the union of episode trajectories and are immutable after
construction, so they can be shared freely across worker threads.
"""

from __future__ import annotations

import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

from .errors import (
    FileFormatError,
    InconsistentInputError,
    InvalidInputError,
    NoPathError,
    UnknownNodeError,
)
from .validation import Vec3, check_finite_position

if TYPE_CHECKING:  # pragma: no cover
    from .alignment import GroundingMatrix
    from .dataset import Episode

logger = logging.getLogger(__name__)

# Maximum disagreement (meters) tolerated between repeated observations of
# the same waypoint id before build_graph refuses the input.
POSITION_TOLERANCE_M = 1e-6

GRAPH_FORMAT = "toponav-graph-v1"


@dataclass(frozen=True)
class GraphNode:
    """A viewpoint: a panorama observation anchored at a position in meters."""

    id: str
    position: Vec3
    panorama: str

    def __post_init__(self) -> None:
        if not self.id:
            raise InvalidInputError("node id must be non-empty")
        object.__setattr__(self, "position", check_finite_position(self.position))


class TopoGraph:
    """Undirected unit-weight viewpoint graph for one scene.

    Invariants enforced at construction: unique node ids, no self-loops,
    every edge endpoint present. Duplicate edges collapse silently (edge
    sets are unions). Instances are immutable afterwards.
    """

    def __init__(
        self,
        scene_id: str,
        nodes: Iterable[GraphNode] = (),
        edges: Iterable[tuple[str, str]] = (),
    ) -> None:
        self.scene_id = scene_id
        self._nodes: dict[str, GraphNode] = {}
        for node in nodes:
            existing = self._nodes.get(node.id)
            if existing is not None and existing != node:
                raise InconsistentInputError(
                    f"duplicate node id {node.id!r} with differing data"
                )
            self._nodes[node.id] = node

        adjacency: dict[str, set[str]] = {nid: set() for nid in self._nodes}
        edge_set: set[tuple[str, str]] = set()
        for a, b in edges:
            if a == b:
                raise InvalidInputError(f"self-loop on node {a!r} is not allowed")
            for endpoint in (a, b):
                if endpoint not in self._nodes:
                    raise UnknownNodeError(f"edge endpoint {endpoint!r} is not a node")
            edge_set.add((a, b) if a < b else (b, a))
            adjacency[a].add(b)
            adjacency[b].add(a)

        self._edges = frozenset(edge_set)
        # Neighbor lists are pre-sorted so BFS expansion order is reproducible.
        self._adjacency: dict[str, tuple[str, ...]] = {
            nid: tuple(sorted(neighbors)) for nid, neighbors in adjacency.items()
        }

    @property
    def num_nodes(self) -> int:
        return len(self._nodes)

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    def node_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._nodes))

    def nodes(self) -> tuple[GraphNode, ...]:
        return tuple(self._nodes[nid] for nid in self.node_ids())

    def edges(self) -> tuple[tuple[str, str], ...]:
        return tuple(sorted(self._edges))

    def node(self, node_id: str) -> GraphNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNodeError(
                f"node {node_id!r} not in scene {self.scene_id!r}"
            ) from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def has_edge(self, a: str, b: str) -> bool:
        return ((a, b) if a < b else (b, a)) in self._edges

    def neighbors(self, node_id: str) -> tuple[str, ...]:
        """Neighbor ids in lexicographic order."""
        if node_id not in self._adjacency:
            raise UnknownNodeError(f"node {node_id!r} not in scene {self.scene_id!r}")
        return self._adjacency[node_id]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TopoGraph):
            return NotImplemented
        return (
            self.scene_id == other.scene_id
            and self._nodes == other._nodes
            and self._edges == other._edges
        )

    def __repr__(self) -> str:
        return (
            f"TopoGraph(scene_id={self.scene_id!r}, "
            f"nodes={self.num_nodes}, edges={self.num_edges})"
        )


@dataclass(frozen=True)
class NodePath:
    """An ordered walk over graph nodes.

    ``positions`` and ``panoramas`` are derived from the source graph at
    construction time; use :meth:`from_ids` to get connectivity checking.
    The direct constructor is reserved for deserialization.
    """

    node_ids: tuple[str, ...]
    positions: tuple[Vec3, ...]
    panoramas: tuple[str, ...] = ()

    @classmethod
    def from_ids(cls, graph: TopoGraph, node_ids: Sequence[str]) -> "NodePath":
        ids = tuple(node_ids)
        if not ids:
            raise InvalidInputError("a path must contain at least one node")
        nodes = [graph.node(nid) for nid in ids]
        for a, b in zip(ids, ids[1:]):
            if not graph.has_edge(a, b):
                raise InvalidInputError(
                    f"path step {a!r} -> {b!r} is not an edge in scene {graph.scene_id!r}"
                )
        return cls(
            node_ids=ids,
            positions=tuple(n.position for n in nodes),
            panoramas=tuple(n.panorama for n in nodes),
        )

    def __len__(self) -> int:
        return len(self.node_ids)


@dataclass
class PathHypothesis:
    """A candidate path to one retrieved goal.

    ``goal_rank`` is the 1-based retrieval rank of the goal this path leads
    to. Ranking populates exactly one of ``alignment`` (Approach I) or
    ``rating`` (Approach II); ``matrix`` keeps the grounding judgments that
    produced ``alignment`` so episode traces can be re-ranked offline.
    """

    path: NodePath
    goal_rank: int
    alignment: Optional[float] = None
    rating: Optional[int] = None
    matrix: Optional["GroundingMatrix"] = field(default=None, repr=False)


def build_graph(episodes: Sequence["Episode"], scene_id: str) -> TopoGraph:
    """Union the waypoints and consecutive-pair edges of all episode paths.

    Every episode must belong to ``scene_id`` and carry waypoint data (id,
    position, panorama) for each node on its path. Re-observations of a
    waypoint must agree on position within ``POSITION_TOLERANCE_M``.
    """
    nodes: dict[str, GraphNode] = {}
    edge_set: set[tuple[str, str]] = set()
    for episode in episodes:
        if episode.scene_id != scene_id:
            raise InvalidInputError(
                f"episode {episode.episode_id!r} belongs to scene "
                f"{episode.scene_id!r}, not {scene_id!r}"
            )
        waypoints = episode.waypoints or {}
        for nid in episode.gt_path:
            waypoint = waypoints.get(nid)
            if waypoint is None:
                raise InvalidInputError(
                    f"episode {episode.episode_id!r} has no waypoint data for {nid!r}"
                )
            known = nodes.get(nid)
            if known is None:
                nodes[nid] = waypoint
            elif math.dist(known.position, waypoint.position) > POSITION_TOLERANCE_M:
                raise InconsistentInputError(
                    f"waypoint {nid!r} observed at {known.position} and "
                    f"{waypoint.position} (episode {episode.episode_id!r})"
                )
        for a, b in zip(episode.gt_path, episode.gt_path[1:]):
            if a != b:  # a repeated waypoint is a pause, not a self-loop
                edge_set.add((a, b) if a < b else (b, a))
    return TopoGraph(scene_id, nodes.values(), edge_set)


def shortest_path(graph: TopoGraph, start: str, goal: str) -> NodePath:
    """Minimum-hop path from ``start`` to ``goal``.

    BFS expands neighbors in lexicographic id order, so tie-breaking among
    equal-length paths is reproducible across runs.
    """
    for nid in (start, goal):
        if not graph.has_node(nid):
            raise UnknownNodeError(f"node {nid!r} not in scene {graph.scene_id!r}")
    if start == goal:
        return NodePath.from_ids(graph, [start])

    parents: dict[str, str] = {}
    visited = {start}
    queue: deque[str] = deque([start])
    while queue:
        current = queue.popleft()
        for neighbor in graph.neighbors(current):
            if neighbor in visited:
                continue
            parents[neighbor] = current
            if neighbor == goal:
                chain = [goal]
                while chain[-1] != start:
                    chain.append(parents[chain[-1]])
                return NodePath.from_ids(graph, chain[::-1])
            visited.add(neighbor)
            queue.append(neighbor)
    raise NoPathError(f"no path from {start!r} to {goal!r} in scene {graph.scene_id!r}")


def generate_hypotheses(
    graph: TopoGraph,
    start: str,
    goals: Sequence[str],
    diagnostics: Optional[list[str]] = None,
) -> list[PathHypothesis]:
    """One shortest-path hypothesis per reachable goal, retrieval order kept.

    Goals must be ordered by retrieval score descending. Unreachable goals
    are skipped with a diagnostic (appended to ``diagnostics`` when given);
    duplicate node sequences keep only the best-ranked occurrence. An empty
    result is legal and means every goal was unreachable.
    """
    if not goals:
        raise InvalidInputError("goals must be non-empty")
    hypotheses: list[PathHypothesis] = []
    seen: set[tuple[str, ...]] = set()
    for rank, goal in enumerate(goals, start=1):
        try:
            path = shortest_path(graph, start, goal)
        except NoPathError:
            message = f"goal {goal!r} (rank {rank}) unreachable from {start!r}"
            logger.warning("%s", message)
            if diagnostics is not None:
                diagnostics.append(message)
            continue
        if path.node_ids in seen:
            continue
        seen.add(path.node_ids)
        hypotheses.append(PathHypothesis(path=path, goal_rank=rank))
    return hypotheses


def save_graph(graph: TopoGraph, path: str | Path) -> None:
    """Write the graph as a JSON document (positions kept at full precision)."""
    Path(path).write_text(json.dumps(graph_to_dict(graph), indent=2, sort_keys=True))


def load_graph(path: str | Path) -> TopoGraph:
    """Load a graph written by :func:`save_graph`.

    Malformed files raise :class:`FileFormatError` with line/field context.
    """
    source = Path(path)
    try:
        document = json.loads(source.read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(
            f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return graph_from_dict(document, context=str(source))


def graph_to_dict(graph: TopoGraph) -> dict:
    return {
        "format": GRAPH_FORMAT,
        "scene_id": graph.scene_id,
        "nodes": [
            {"id": n.id, "position": list(n.position), "panorama": n.panorama}
            for n in graph.nodes()
        ],
        "edges": [list(edge) for edge in graph.edges()],
    }


def graph_from_dict(document: object, context: str = "<graph>") -> TopoGraph:
    if not isinstance(document, dict):
        raise FileFormatError(f"{context}: top level must be a JSON object")

    def fetch(mapping: dict, key: str, where: str) -> object:
        if key not in mapping:
            raise FileFormatError(f"{context}: missing field {key!r} in {where}")
        return mapping[key]

    scene_id = fetch(document, "scene_id", "document")
    raw_nodes = fetch(document, "nodes", "document")
    raw_edges = fetch(document, "edges", "document")
    if not isinstance(raw_nodes, list) or not isinstance(raw_edges, list):
        raise FileFormatError(f"{context}: 'nodes' and 'edges' must be arrays")

    nodes = []
    for index, entry in enumerate(raw_nodes):
        where = f"nodes[{index}]"
        if not isinstance(entry, dict):
            raise FileFormatError(f"{context}: {where} must be an object")
        try:
            nodes.append(
                GraphNode(
                    id=str(fetch(entry, "id", where)),
                    position=tuple(fetch(entry, "position", where)),  # type: ignore[arg-type]
                    panorama=str(fetch(entry, "panorama", where)),
                )
            )
        except (TypeError, InvalidInputError) as exc:
            raise FileFormatError(f"{context}: {where}: {exc}") from exc

    edges = []
    for index, entry in enumerate(raw_edges):
        if not isinstance(entry, list) or len(entry) != 2:
            raise FileFormatError(
                f"{context}: edges[{index}] must be a pair of node ids"
            )
        edges.append((str(entry[0]), str(entry[1])))

    try:
        return TopoGraph(str(scene_id), nodes, edges)
    except (InvalidInputError, InconsistentInputError, UnknownNodeError) as exc:
        raise FileFormatError(f"{context}: {exc}") from exc
