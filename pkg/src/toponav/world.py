"""Seeded synthetic worlds: desk-scale stand-ins for scanned scenes.

A world is a connected unit-edge graph with grid positions (1 m spacing),
per-node landmark label sets, and templated episodes whose landmark
sequence is realizable along the ground-truth path in order. With
``unique_landmarks=True`` (the default) every instruction phrase labels
exactly one node in the whole world, one per ground-truth path node; an
exact pipeline on such a world must recover the ground-truth path, which
makes end-to-end regressions detectable. With ``unique_landmarks=False``
labels are drawn from a shared vocabulary and may repeat across nodes,
which produces retrieval ambiguity and ranking ties.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .dataset import Episode
from .errors import FileFormatError, WorldGenerationError
from .providers.base import ProviderSet
from .providers.oracle import oracle_provider_set
from .topomap import GraphNode, TopoGraph, graph_from_dict, graph_to_dict, shortest_path

WORLD_FORMAT = "toponav-world-v1"

# Vocabulary building blocks. Names never contain prepositions or commas,
# so the rule-based extractor recovers them verbatim from templates.
_NOUNS = (
    "kitchen bedroom bathroom hallway staircase sofa table lamp mirror sink "
    "fireplace bookshelf window doorway painting rug piano wardrobe desk "
    "armchair counter plant television fridge oven bathtub dresser bench "
    "cabinet chandelier"
).split()
_ADJECTIVES = (
    "blue red green white black wooden marble round square tall narrow wide "
    "antique modern striped leather velvet copper glass stone"
).split()


def landmark_vocabulary(n: int) -> list[str]:
    """The first ``n`` landmark names in deterministic order."""
    if n < 1:
        raise WorldGenerationError(f"need at least 1 landmark type, got {n}")
    capacity = len(_NOUNS) * (1 + len(_ADJECTIVES))
    if n > capacity:
        raise WorldGenerationError(
            f"{n} landmark types requested but only {capacity} are nameable"
        )
    combos = (f"{adj} {noun}" for adj, noun in itertools.product(_ADJECTIVES, _NOUNS))
    return list(itertools.islice(itertools.chain(_NOUNS, combos), n))


def template_instruction(phrases: list[str]) -> str:
    """Render landmark phrases with the fixed instruction grammar."""
    if not phrases:
        raise WorldGenerationError("cannot template an instruction with no landmarks")
    if len(phrases) == 1:
        return f"stop at the {phrases[0]}."
    head = f"go to the {phrases[0]}"
    middle = "".join(f", then the {p}" for p in phrases[1:-1])
    return f"{head}{middle}, and stop at the {phrases[-1]}."


@dataclass
class SyntheticWorld:
    """A generated scene plus the ground truth its oracle providers answer from."""

    graph: TopoGraph
    labels: dict[str, frozenset[str]]
    episodes: list[Episode]
    seed: int

    @property
    def scene_id(self) -> str:
        return self.graph.scene_id

    def oracle_providers(
        self, flip_probability: float = 0.0, noise_seed: int = 0
    ) -> ProviderSet:
        return oracle_provider_set(self.labels, flip_probability, noise_seed)


def _grid_positions(rng: random.Random, n: int) -> list[tuple[float, float, float]]:
    side = math.ceil(math.sqrt(n)) + 1
    cells = rng.sample(range(side * side), n)
    return [(float(c % side), float(c // side), 0.0) for c in cells]


def _connected_edges(
    rng: random.Random, ids: list[str], branching: float
) -> set[tuple[str, str]]:
    """Random spanning tree plus extra edges up to a target mean degree."""
    n = len(ids)
    edges: set[tuple[str, str]] = set()
    for i in range(1, n):
        j = rng.randrange(i)
        a, b = ids[i], ids[j]
        edges.add((a, b) if a < b else (b, a))
    target_edges = max(n - 1, round(n * branching / 2))
    candidates = [
        (ids[i], ids[j]) for i in range(n) for j in range(i + 1, n)
        if (min(ids[i], ids[j]), max(ids[i], ids[j])) not in edges
    ]
    extra = min(target_edges - len(edges), len(candidates))
    if extra > 0:
        for a, b in rng.sample(candidates, extra):
            edges.add((a, b) if a < b else (b, a))
    return edges


def _bfs_distances(graph: TopoGraph, start: str) -> dict[str, int]:
    dist = {start: 0}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for neighbor in graph.neighbors(current):
            if neighbor not in dist:
                dist[neighbor] = dist[current] + 1
                queue.append(neighbor)
    return dist


def _sample_goal_pair(
    rng: random.Random, graph: TopoGraph, min_hops: int, max_hops: int
) -> tuple[str, str]:
    for lo in (min_hops, 1):
        eligible = []
        for start in graph.node_ids():
            dist = _bfs_distances(graph, start)
            eligible.extend(
                (start, goal)
                for goal, d in sorted(dist.items())
                if lo <= d <= max_hops
            )
        if eligible:
            return eligible[rng.randrange(len(eligible))]
    raise WorldGenerationError("graph has no usable start/goal pairs")


def _random_simple_walk(
    rng: random.Random, graph: TopoGraph, min_len: int, max_len: int
) -> list[str]:
    best: list[str] = []
    for _ in range(50):
        start = graph.node_ids()[rng.randrange(graph.num_nodes)]
        walk = [start]
        target = rng.randint(min_len, max_len)
        while len(walk) < target:
            options = [n for n in graph.neighbors(walk[-1]) if n not in walk]
            if not options:
                break
            walk.append(options[rng.randrange(len(options))])
        if len(walk) >= min_len:
            return walk
        if len(walk) > len(best):
            best = walk
    if len(best) >= 2:
        return best
    raise WorldGenerationError("could not sample a walk of at least 2 nodes")


def generate_world(
    n_nodes: int,
    branching: float,
    n_landmark_types: int,
    n_episodes: int,
    seed: int,
    scene_id: Optional[str] = None,
    unique_landmarks: bool = True,
    min_path_len: int = 3,
    max_path_len: int = 6,
) -> SyntheticWorld:
    """Generate a world fully determined by ``seed``.

    ``branching`` is the target mean node degree (floored at spanning-tree
    connectivity). Raises :class:`WorldGenerationError` when the requested
    landmark types cannot cover the episodes (unique mode needs one fresh
    type per ground-truth path node).
    """
    if n_nodes < 2:
        raise WorldGenerationError(f"need at least 2 nodes, got {n_nodes}")
    if n_episodes < 1 or branching <= 0 or min_path_len < 2 or max_path_len < min_path_len:
        raise WorldGenerationError("world parameters must be positive and ordered")

    rng = random.Random(seed)
    scene = scene_id or f"synthetic-{seed:04d}"
    ids = [f"n{i:03d}" for i in range(n_nodes)]
    positions = _grid_positions(rng, n_nodes)
    nodes = [
        GraphNode(id=nid, position=pos, panorama=f"synthetic://{scene}/{nid}")
        for nid, pos in zip(ids, positions)
    ]
    graph = TopoGraph(scene, nodes, _connected_edges(rng, ids, branching))

    vocabulary = landmark_vocabulary(n_landmark_types)
    labels: dict[str, set[str]] = {nid: set() for nid in ids}
    episodes: list[Episode] = []

    if unique_landmarks:
        fresh = iter(vocabulary)
        for index in range(n_episodes):
            start, goal = _sample_goal_pair(rng, graph, min_path_len - 1, max_path_len - 1)
            path = list(shortest_path(graph, start, goal).node_ids)
            phrases = []
            for nid in path:
                label = next(fresh, None)
                if label is None:
                    raise WorldGenerationError(
                        f"{n_landmark_types} landmark types cannot uniquely label "
                        f"{n_episodes} episodes; raise n_landmark_types"
                    )
                labels[nid].add(label)
                phrases.append(label)
            episodes.append(
                _make_episode(graph, scene, index, path, phrases)
            )
    else:
        for nid in ids:
            count = rng.randint(1, min(3, len(vocabulary)))
            labels[nid].update(rng.sample(vocabulary, count))
        for index in range(n_episodes):
            path = _random_simple_walk(rng, graph, min_path_len, max_path_len)
            phrases = [
                sorted(labels[nid])[rng.randrange(len(labels[nid]))] for nid in path
            ]
            episodes.append(
                _make_episode(graph, scene, index, path, phrases)
            )

    return SyntheticWorld(
        graph=graph,
        labels={nid: frozenset(found) for nid, found in labels.items()},
        episodes=episodes,
        seed=seed,
    )


def _make_episode(
    graph: TopoGraph, scene: str, index: int, path: list[str], phrases: list[str]
) -> Episode:
    return Episode(
        episode_id=f"{scene}-ep{index:03d}",
        scene_id=scene,
        instruction=template_instruction(phrases),
        start_node=path[0],
        gt_path=tuple(path),
        waypoints={nid: graph.node(nid) for nid in path},
    )


def world_to_dict(world: SyntheticWorld) -> dict:
    return {
        "format": WORLD_FORMAT,
        "seed": world.seed,
        "graph": graph_to_dict(world.graph),
        "labels": {nid: sorted(found) for nid, found in sorted(world.labels.items())},
        "episodes": [
            {
                "episode_id": e.episode_id,
                "scene_id": e.scene_id,
                "instruction": e.instruction,
                "start_node": e.start_node,
                "gt_path": list(e.gt_path),
            }
            for e in world.episodes
        ],
    }


def save_world(world: SyntheticWorld, path: str | Path) -> None:
    Path(path).write_text(json.dumps(world_to_dict(world), indent=2, sort_keys=True))


def load_world(path: str | Path) -> SyntheticWorld:
    source = Path(path)
    try:
        document = json.loads(source.read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(
            f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(document, dict) or document.get("format") != WORLD_FORMAT:
        raise FileFormatError(f"{source}: not a {WORLD_FORMAT} document")
    try:
        graph = graph_from_dict(document["graph"], context=f"{source}: graph")
        labels = {
            str(nid): frozenset(str(v) for v in found)
            for nid, found in document["labels"].items()
        }
        episodes = [
            Episode(
                episode_id=str(e["episode_id"]),
                scene_id=str(e["scene_id"]),
                instruction=str(e["instruction"]),
                start_node=str(e["start_node"]),
                gt_path=tuple(str(v) for v in e["gt_path"]),
                waypoints={str(v): graph.node(str(v)) for v in e["gt_path"]},
            )
            for e in document["episodes"]
        ]
        return SyntheticWorld(
            graph=graph, labels=labels, episodes=episodes, seed=int(document["seed"])
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise FileFormatError(f"{source}: {exc!r}") from exc
