"""Command-line interface: map building, world generation, retrieval
evaluation, single-episode runs, full benchmarks, and report re-rendering."""

from __future__ import annotations

import json
import sys
from collections import defaultdict
from pathlib import Path
from typing import Optional

import click

from .dataset import load_episodes
from .errors import InvalidInputError
from .metrics import EpisodeResult, MetricConfig, scene_report, overall_row
from .pipeline import (
    BenchScene,
    RunConfig,
    eval_retrieval,
    run_benchmark,
    run_episode,
)
from .providers.base import ProviderConfig
from .providers.remote import remote_provider_set
from .report import render_csv, render_text
from .topomap import build_graph, load_graph, save_graph
from .world import generate_world, load_world, save_world

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


@click.group()
def main() -> None:
    """Instruction-following navigation on topological maps."""


@main.command("gen-world")
@click.option("--nodes", type=int, default=30, show_default=True)
@click.option("--branching", type=float, default=2.5, show_default=True,
              help="Target mean node degree.")
@click.option("--landmark-types", type=int, default=200, show_default=True)
@click.option("--episodes", type=int, default=21, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--scene-id", type=str, default=None)
@click.option("--shared-landmarks", is_flag=True,
              help="Draw labels from a shared vocabulary (ambiguous retrieval) "
                   "instead of uniquely labeling each episode.")
@click.option("-o", "--out", type=click.Path(dir_okay=False, path_type=Path),
              required=True)
def gen_world_cmd(nodes, branching, landmark_types, episodes, seed, scene_id,
                  shared_landmarks, out) -> None:
    """Generate a seeded synthetic world file."""
    world = generate_world(
        n_nodes=nodes,
        branching=branching,
        n_landmark_types=landmark_types,
        n_episodes=episodes,
        seed=seed,
        scene_id=scene_id,
        unique_landmarks=not shared_landmarks,
    )
    save_world(world, out)
    click.echo(
        f"wrote {out}: scene {world.scene_id}, {world.graph.num_nodes} nodes, "
        f"{world.graph.num_edges} edges, {len(world.episodes)} episodes"
    )


@main.command("build-map")
@click.option("--episodes", "episodes_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--sidecar", "sidecar_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True, help="Viewpoint positions/panorama references.")
@click.option("--scene", "scene_id", type=str, default=None,
              help="Scene to build (defaults to the single scan present).")
@click.option("-o", "--out", type=click.Path(dir_okay=False, path_type=Path),
              required=True)
def build_map_cmd(episodes_path, sidecar_path, scene_id, out) -> None:
    """Build a scene graph from episode trajectories."""
    episodes = load_episodes(episodes_path, sidecar_path)
    scans = sorted({e.scene_id for e in episodes})
    if scene_id is None:
        if len(scans) != 1:
            raise click.UsageError(
                f"multiple scans present ({', '.join(scans)}); pass --scene"
            )
        scene_id = scans[0]
    graph = build_graph([e for e in episodes if e.scene_id == scene_id], scene_id)
    save_graph(graph, out)
    click.echo(
        f"wrote {out}: scene {scene_id}, {graph.num_nodes} nodes, "
        f"{graph.num_edges} edges"
    )


@main.command("retrieve")
@click.option("--world", "world_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("-k", type=int, default=10, show_default=True)
def retrieve_cmd(world_path, k) -> None:
    """Evaluate oracle goal retrieval as mean precision@k over landmark types."""
    world = load_world(world_path)
    value = eval_retrieval(world, k)
    click.echo(f"mean precision@{k}: {value:.4f}")


@main.command("run")
@click.option("--world", "world_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--episode-id", type=str, default=None,
              help="Episode to run (defaults to the first).")
@click.option("--approach", type=click.Choice(["I", "II"]), default="I",
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-k", type=int, default=3, show_default=True)
@click.option("--flip-noise", type=float, default=0.0, show_default=True,
              help="Grounding flip probability for the oracle provider.")
@click.option("--noise-seed", type=int, default=0, show_default=True)
@click.option("--trace-dir", type=click.Path(file_okay=False, path_type=Path),
              default=None)
def run_cmd(world_path, episode_id, approach, seed, k, flip_noise, noise_seed,
            trace_dir) -> None:
    """Run a single episode with oracle providers and print its result."""
    world = load_world(world_path)
    if episode_id is None:
        episode = world.episodes[0]
    else:
        matches = [e for e in world.episodes if e.episode_id == episode_id]
        if not matches:
            raise click.UsageError(f"episode {episode_id!r} not in {world_path}")
        episode = matches[0]
    cfg = RunConfig(k=k, approach=approach, seed=seed, trace_dir=trace_dir)
    result = run_episode(
        episode, world.graph, cfg, world.oracle_providers(flip_noise, noise_seed)
    )
    click.echo(json.dumps(result.to_dict(), indent=2, sort_keys=True))


def _load_config_file(path: Path) -> dict:
    if path.suffix.lower() == ".json":
        return json.loads(path.read_text())
    with open(path, "rb") as handle:
        return tomllib.load(handle)


def _provider_config(entry: dict, cache_dir: Optional[str]) -> ProviderConfig:
    kwargs = dict(entry)
    if cache_dir is not None and "cache_dir" not in kwargs:
        kwargs["cache_dir"] = cache_dir
    if "cache_dir" in kwargs and kwargs["cache_dir"] is not None:
        kwargs["cache_dir"] = Path(kwargs["cache_dir"])
    return ProviderConfig(**kwargs)


def _scenes_from_config(config: dict) -> list[BenchScene]:
    providers_cfg = config.get("providers", {})
    mode = providers_cfg.get("mode", "oracle")
    scenes: list[BenchScene] = []

    worlds = [load_world(path) for path in config.get("worlds", [])]
    if mode == "oracle":
        flip = float(config.get("flip_noise", 0.0))
        noise_seed = int(config.get("noise_seed", 0))
        scenes.extend(BenchScene.from_world(w, flip, noise_seed) for w in worlds)
        if config.get("datasets"):
            raise InvalidInputError(
                "dataset scenes need remote providers (providers.mode = 'remote')"
            )
        return scenes

    if mode != "remote":
        raise InvalidInputError(f"unknown providers.mode {mode!r}")
    shared_cache = providers_cfg.get("cache_dir")
    configs = {
        capability: _provider_config(providers_cfg[capability], shared_cache)
        for capability in ("extraction", "embedding", "grounding", "rating")
        if capability in providers_cfg
    }
    providers = remote_provider_set(configs)
    for world in worlds:
        scenes.append(
            BenchScene(
                scene_id=world.scene_id,
                graph=world.graph,
                episodes=list(world.episodes),
                providers=providers,
            )
        )
    for entry in config.get("datasets", []):
        episodes = load_episodes(entry["episodes"], entry["sidecar"])
        by_scan = defaultdict(list)
        for episode in episodes:
            by_scan[episode.scene_id].append(episode)
        for scan in sorted(by_scan):
            graph = build_graph(by_scan[scan], scan)
            scenes.append(
                BenchScene(
                    scene_id=scan, graph=graph, episodes=by_scan[scan],
                    providers=providers,
                )
            )
    return scenes


@main.command("bench")
@click.option("--config", "config_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help="TOML or JSON benchmark config.")
@click.option("--world", "world_paths", multiple=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--approach", type=click.Choice(["I", "II"]), default=None)
@click.option("--seed", type=int, default=None)
@click.option("-k", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--flip-noise", type=float, default=None)
@click.option("--noise-seed", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path),
              default=None, help="Directory for results.jsonl and reports.")
@click.option("--trace-dir", type=click.Path(file_okay=False, path_type=Path),
              default=None)
def bench_cmd(config_path, world_paths, approach, seed, k, workers, flip_noise,
              noise_seed, out, trace_dir) -> None:
    """Run the full benchmark and emit a table-style report."""
    config = _load_config_file(config_path) if config_path else {}
    for key, value in (
        ("approach", approach), ("seed", seed), ("k", k), ("workers", workers),
        ("flip_noise", flip_noise), ("noise_seed", noise_seed),
        ("out_dir", str(out) if out else None),
    ):
        if value is not None:
            config[key] = value
    if world_paths:
        config.setdefault("worlds", [])
        config["worlds"] = list(config["worlds"]) + [str(p) for p in world_paths]

    metric_cfg = config.get("metric", {})
    cfg = RunConfig(
        k=int(config.get("k", 3)),
        approach=str(config.get("approach", "I")),
        seed=int(config.get("seed", 0)),
        metric=MetricConfig(
            dtw_threshold_m=float(metric_cfg.get("dtw_threshold_m", 3.0)),
            success_ndtw=float(metric_cfg.get("success_ndtw", 0.87)),
        ),
        scenes=tuple(config["scenes"]) if config.get("scenes") else None,
        episodes=tuple(config["episodes"]) if config.get("episodes") else None,
        workers=int(config.get("workers", 4)),
        trace_dir=Path(trace_dir) if trace_dir else None,
    )
    scenes = _scenes_from_config(config)
    run = run_benchmark(scenes, cfg, out_dir=config.get("out_dir"))
    click.echo(render_text(run.reports, run.overall), nl=False)


@main.command("report")
@click.option("--results", "results_path",
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True, help="results.jsonl from a bench run.")
@click.option("--success-ndtw", type=float, default=0.87, show_default=True)
@click.option("--dtw-threshold", type=float, default=3.0, show_default=True)
@click.option("--csv", "as_csv", is_flag=True)
def report_cmd(results_path, success_ndtw, dtw_threshold, as_csv) -> None:
    """Re-render the benchmark table from machine-readable results."""
    cfg = MetricConfig(dtw_threshold_m=dtw_threshold, success_ndtw=success_ndtw)
    results = [
        EpisodeResult.from_dict(json.loads(line))
        for line in results_path.read_text().splitlines()
        if line.strip()
    ]
    if not results:
        raise click.UsageError(f"{results_path} contains no results")
    by_scene = defaultdict(list)
    for result in results:
        by_scene[result.scene_id].append(result)
    reports = [
        scene_report(scene, by_scene[scene], cfg) for scene in sorted(by_scene)
    ]
    overall = overall_row(reports)
    renderer = render_csv if as_csv else render_text
    click.echo(renderer(reports, overall), nl=False)


if __name__ == "__main__":  # pragma: no cover
    main()
