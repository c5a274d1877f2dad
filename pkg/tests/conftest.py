from __future__ import annotations

import pytest

from toponav.dataset import Episode
from toponav.topomap import GraphNode, TopoGraph


def grid_node(node_id: str, x: float, y: float = 0.0) -> GraphNode:
    return GraphNode(id=node_id, position=(x, y, 0.0), panorama=f"pano://{node_id}")


def make_graph(scene_id: str, edges: list[tuple[str, str]],
               extra_nodes: tuple[str, ...] = ()) -> TopoGraph:
    """Graph with the given edges; positions spread 1 m apart on the x axis."""
    ids = sorted({n for e in edges for n in e} | set(extra_nodes))
    nodes = [grid_node(nid, float(i)) for i, nid in enumerate(ids)]
    return TopoGraph(scene_id, nodes, edges)


def make_episode(
    graph: TopoGraph,
    episode_id: str,
    path: list[str],
    instruction: str = "go to the table, and stop at the lamp.",
) -> Episode:
    return Episode(
        episode_id=episode_id,
        scene_id=graph.scene_id,
        instruction=instruction,
        start_node=path[0],
        gt_path=tuple(path),
        waypoints={nid: graph.node(nid) for nid in path},
    )


@pytest.fixture
def square_graph() -> TopoGraph:
    """4-cycle a-b-c-d-a."""
    return make_graph("square", [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])


@pytest.fixture
def line_graph() -> TopoGraph:
    """Path graph a-b-c-d-e."""
    return make_graph("line", [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e")])
