"""Episode records and R2R-style dataset ingestion.

An episodes file is a JSON array of records
``{"episode_id", "scan", "instruction", "path": [viewpoint ids]}``; a
sidecar file maps ``scan -> viewpoint -> {"position": [x, y, z],
"panorama": ref}``. Loading attaches full waypoint data to each episode
so scene graphs can be built without further lookups.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .errors import FileFormatError, InvalidInputError, ReferentialIntegrityError
from .topomap import GraphNode


@dataclass
class Episode:
    """One navigation episode: an instruction and its ground-truth path."""

    episode_id: str
    scene_id: str
    instruction: str
    start_node: str
    gt_path: tuple[str, ...]
    waypoints: Optional[Mapping[str, GraphNode]] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.gt_path = tuple(self.gt_path)
        if not self.gt_path:
            raise InvalidInputError(f"episode {self.episode_id!r} has an empty path")
        if self.gt_path[0] != self.start_node:
            raise InvalidInputError(
                f"episode {self.episode_id!r}: path starts at {self.gt_path[0]!r}, "
                f"not start_node {self.start_node!r}"
            )


def _load_json(path: Path) -> object:
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(
            f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc


def load_episodes(path: str | Path, sidecar_path: str | Path) -> list[Episode]:
    """Parse episode records and resolve their viewpoints via the sidecar.

    A path viewpoint missing from the sidecar raises
    :class:`ReferentialIntegrityError` naming the episode.
    """
    source = Path(path)
    records = _load_json(source)
    if not isinstance(records, list):
        raise FileFormatError(f"{source}: top level must be a JSON array")
    sidecar_source = Path(sidecar_path)
    sidecar = _load_json(sidecar_source)
    if not isinstance(sidecar, dict):
        raise FileFormatError(f"{sidecar_source}: top level must be a JSON object")

    episodes = []
    for index, record in enumerate(records):
        where = f"{source}: records[{index}]"
        if not isinstance(record, dict):
            raise FileFormatError(f"{where} must be an object")
        try:
            episode_id = str(record["episode_id"])
            scan = str(record["scan"])
            instruction = str(record["instruction"])
            raw_path = record["path"]
        except KeyError as exc:
            raise FileFormatError(f"{where}: missing field {exc.args[0]!r}") from exc
        if not isinstance(raw_path, list) or not raw_path:
            raise FileFormatError(f"{where}: 'path' must be a non-empty array")

        scan_views = sidecar.get(scan, {})
        waypoints: dict[str, GraphNode] = {}
        for viewpoint in raw_path:
            vid = str(viewpoint)
            view = scan_views.get(vid)
            if view is None:
                raise ReferentialIntegrityError(
                    f"episode {episode_id!r}: viewpoint {vid!r} missing from "
                    f"sidecar for scan {scan!r}"
                )
            try:
                waypoints[vid] = GraphNode(
                    id=vid,
                    position=tuple(view["position"]),
                    panorama=str(view["panorama"]),
                )
            except (KeyError, TypeError, InvalidInputError) as exc:
                raise FileFormatError(
                    f"{sidecar_source}: {scan}/{vid}: {exc}"
                ) from exc
        episodes.append(
            Episode(
                episode_id=episode_id,
                scene_id=scan,
                instruction=instruction,
                start_node=str(raw_path[0]),
                gt_path=tuple(str(v) for v in raw_path),
                waypoints=waypoints,
            )
        )
    return episodes
