"""Seeded synthetic campaign generator.

Writes a complete results tree in the layout ``capture`` reads, with an
outcome model driven by ordered failure rules. All randomness comes from
numpy's PCG64 seeded through ``SeedSequence`` spawn keys, so every run has
its own substream and the tree does not depend on generation order.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import yaml

from .capture import MANIFEST_NAME, TestOutcome, write_test_report
from .errors import OutputNotEmpty

DEMO_BASE = "https://purl.org/robovast/datasets/nav-demo"
DEMO_CREATOR = ("Josiah Carberry", "0000-0002-1825-0097")

# spawn-key tags, one per independent random stream family
_TAG_PATH, _TAG_OBSTACLES, _TAG_CONFIG, _TAG_RULE, _TAG_RUN = range(1, 6)

_EPOCH = datetime(2025, 6, 2, 8, 0, tzinfo=timezone.utc)
_INPUTS_CREATED = "2025-03-14T09:30:00Z"
_INPUTS_MODIFIED = "2025-05-20T16:45:00Z"
_RUN_SLOT_S = 120
_SPEED_MPS = 0.5
_RATE_HZ = 10

ROBOT = "turtlebot4"
ABSTRACT_SCENARIO = "inputs/scenarios/nav_to_pose.osc"
VARIATION_FILE = "inputs/scenarios/navigation.vast"
ROBOT_PARAMS = "inputs/robot/nav2_params.yaml"
ROBOT_LAUNCH = "inputs/robot/nav2_bringup.launch.py"


@dataclass(frozen=True)
class AlwaysFail:
    pass


@dataclass(frozen=True)
class FailKOfN:
    """Exactly k failures per block of n selected runs; n=None pools every selected run."""

    k: int
    n: int | None = None

    def __post_init__(self) -> None:
        if self.k < 0 or (self.n is not None and not 0 < self.k <= self.n):
            raise ValueError(f"invalid fail-{self.k}-of-{self.n}")


@dataclass(frozen=True)
class Probability:
    p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"probability out of range: {self.p}")


FailureMode = Union[AlwaysFail, FailKOfN, Probability]


@dataclass(frozen=True)
class FailureRule:
    mode: FailureMode
    map: int | None = None
    path: int | None = None
    density: Decimal | None = None
    radius: Decimal | None = None
    message: str = "goal not reached within the distance threshold"

    def selects(self, cfg: "_Config") -> bool:
        return (
            (self.map is None or self.map == cfg.map)
            and (self.path is None or self.path == cfg.path)
            and (self.density is None or Decimal(self.density) == cfg.density)
            and (self.radius is None or Decimal(self.radius) == cfg.radius)
        )


@dataclass(frozen=True)
class HarnessConfig:
    seed: int = 42
    n_maps: int = 5
    paths_per_map: int = 10
    path_length_m: Decimal = Decimal("10")
    densities: tuple[Decimal, ...] = (Decimal("0"), Decimal("0.2"))
    radii_m: tuple[Decimal, ...] = (Decimal("0.175"), Decimal("0.22"))
    runs_per_config: int = 10
    failure_profile: tuple[FailureRule, ...] = ()
    noise_sigma_m: float = 0.05
    dataset_iri: str = DEMO_BASE

    def __post_init__(self) -> None:
        object.__setattr__(self, "path_length_m", Decimal(str(self.path_length_m)))
        object.__setattr__(self, "densities", tuple(Decimal(str(d)) for d in self.densities))
        object.__setattr__(self, "radii_m", tuple(Decimal(str(r)) for r in self.radii_m))
        object.__setattr__(self, "failure_profile", tuple(self.failure_profile))
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        for name in ("n_maps", "paths_per_map", "runs_per_config"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.densities or not self.radii_m:
            raise ValueError("densities and radii_m must be non-empty")
        if self.path_length_m <= 0:
            raise ValueError("path_length_m must be > 0")
        if any(d < 0 for d in self.densities) or any(r <= 0 for r in self.radii_m):
            raise ValueError("densities must be >= 0 and radii > 0")

    @property
    def n_configs(self) -> int:
        return self.n_maps * self.paths_per_map * len(self.densities) * len(self.radii_m)

    @property
    def n_runs(self) -> int:
        return self.n_configs * self.runs_per_config


@dataclass(frozen=True)
class HarnessSummary:
    n_configs: int
    n_runs: int
    n_failed: int
    total_distance_m: Decimal

    def as_dict(self) -> dict:
        return {
            "n_configs": self.n_configs,
            "n_runs": self.n_runs,
            "n_failed": self.n_failed,
            "total_distance_m": str(self.total_distance_m),
        }


def _story_rules(runs_per_config: int) -> tuple[FailureRule, ...]:
    # 19-of-20 stories: with 10-run configs each rule spans both radii of one path
    # (2 configs, 20 runs); with 20-run configs it targets a single configuration.
    radius = Decimal("0.22") if runs_per_config == 20 else None
    block = 20 if runs_per_config in (10, 20) else None
    collide = "collision with obstacle at intersection"
    return (
        FailureRule(AlwaysFail(), map=4, path=0, message="spawned inside the inflation radius of a wall"),
        FailureRule(AlwaysFail(), map=4, path=1, message="spawned inside the inflation radius of a wall"),
        FailureRule(FailKOfN(19, block), map=3, path=4, density=Decimal("0.2"), radius=radius, message=collide),
        FailureRule(FailKOfN(19, block), map=3, path=7, density=Decimal("0.2"), radius=radius, message=collide),
    )


def paper_profile(seed: int = 42, *, runs_per_config: int = 10, paths_per_map: int = 20) -> HarnessConfig:
    """400 configurations of 10 runs with 290 failures: 80 spawn, 2 x 19 collision, 172 spread."""
    return HarnessConfig(
        seed=seed,
        paths_per_map=paths_per_map,
        runs_per_config=runs_per_config,
        failure_profile=_story_rules(runs_per_config) + (FailureRule(FailKOfN(172)),),
    )


def default_profile(seed: int = 42) -> HarnessConfig:
    return HarnessConfig(
        seed=seed,
        failure_profile=_story_rules(10) + (FailureRule(Probability(0.03)),),
    )


def demo_profile(seed: int = 42) -> HarnessConfig:
    """Two configurations (with and without obstacles) of two runs each."""
    return HarnessConfig(
        seed=seed,
        n_maps=1,
        paths_per_map=1,
        radii_m=(Decimal("0.22"),),
        runs_per_config=2,
        failure_profile=(FailureRule(FailKOfN(1, 2), density=Decimal("0.2")),),
    )


# ---------------------------------------------------------------------------
# model


@dataclass(frozen=True)
class _Config:
    index: int
    map: int
    path: int
    density: Decimal
    radius: Decimal

    @property
    def config_id(self) -> str:
        return f"c_{self.index:04d}"

    @property
    def map_name(self) -> str:
        return f"map_{self.map:02d}"


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _configs(cfg: HarnessConfig) -> list[_Config]:
    out = []
    for m in range(cfg.n_maps):
        for p in range(cfg.paths_per_map):
            for d in cfg.densities:
                for r in cfg.radii_m:
                    out.append(_Config(len(out), m, p, d, r))
    return out


def assign_failures(cfg: HarnessConfig, configs: Sequence[_Config] | None = None) -> dict[tuple[int, int], str]:
    """Failed (config index, run index) pairs and their failure messages.

    Rules apply in order; each claims only runs no earlier rule claimed.
    """
    configs = list(configs) if configs is not None else _configs(cfg)
    claimed: dict[tuple[int, int], str | None] = {}
    for rule_index, rule in enumerate(cfg.failure_profile):
        pool = [
            (c.index, r)
            for c in configs
            if rule.selects(c)
            for r in range(cfg.runs_per_config)
            if (c.index, r) not in claimed
        ]
        rng = _rng(cfg.seed, _TAG_RULE, rule_index)
        mode = rule.mode
        if isinstance(mode, AlwaysFail):
            failed = set(pool)
        elif isinstance(mode, Probability):
            draws = rng.random(len(pool))
            failed = {run for run, x in zip(pool, draws) if x < mode.p}
        else:
            size = mode.n or len(pool)
            if mode.k > size or len(pool) % size:
                raise ValueError(
                    f"rule {rule_index}: cannot fail {mode.k} of {size} over {len(pool)} selected runs"
                )
            failed = set()
            for start in range(0, len(pool), size):
                block = pool[start:start + size]
                picks = rng.permutation(len(block))[: mode.k]
                failed.update(block[i] for i in picks)
        for run in pool:
            claimed[run] = rule.message if run in failed else None
    return {run: msg for run, msg in claimed.items() if msg is not None}


# ---------------------------------------------------------------------------
# writers


def _dump_yaml(data: object) -> str:
    return yaml.safe_dump(data, sort_keys=True, default_flow_style=False, allow_unicode=True)


def _stamp(dt: datetime) -> str:
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def _fmt(x: float, nd: int = 3) -> str:
    text = f"{x:.{nd}f}"
    return "0." + "0" * nd if text == "-0." + "0" * nd else text


def _map_size(m: int) -> tuple[float, float]:
    return 20.0 + 2.0 * m, 15.0


class _Writer:
    def __init__(self, cfg: HarnessConfig, root: Path) -> None:
        self.cfg = cfg
        self.root = root
        self.configs = _configs(cfg)
        self.failures = assign_failures(cfg, self.configs)

    def write(self, rel: str, content: str | bytes) -> None:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(content, str):
            content = content.encode("utf-8")
        path.write_bytes(content)

    def manifest(self) -> None:
        cfg = self.cfg
        maps = [f"inputs/maps/map_{m:02d}.fpm" for m in range(cfg.n_maps)]
        data = {
            "metadata": {
                "title": "Navigation Dataset",
                "description": "Synthetic navigation test campaign: a mobile robot drives "
                "10 Hz-logged point-to-point paths across generated indoor maps.",
                "creators": [{"name": DEMO_CREATOR[0], "orcid": DEMO_CREATOR[1]}],
                "keywords": ["robotics", "navigation", "ROS2"],
                "license": "CC-BY-4.0",
                "dataset_iri": cfg.dataset_iri,
            },
            "publication": [
                {"zip": {"name": "metadata", "filename": "{timestamp:%Y%m%d}_metadata.zip", "include_filter": ["*.json", "*.jsonld"]}},
                {"zip": {"name": "results", "filename": "{timestamp:%Y%m%d}_results.zip", "include_filter": ["*/test.xml", "*.csv"]}},
            ],
            "execution": {
                "runs": cfg.runs_per_config,
                "seed": cfg.seed,
                "variation": {
                    "path_length_m": str(cfg.path_length_m),
                    "obstacle_densities_per_m": [str(d) for d in cfg.densities],
                    "robot_radii_m": [str(r) for r in cfg.radii_m],
                },
                "agents": {"robot": {"name": ROBOT, "parameters": ROBOT_PARAMS, "launch": ROBOT_LAUNCH}},
                "inputs": {
                    "abstract_scenario": ABSTRACT_SCENARIO,
                    "variation_file": VARIATION_FILE,
                    "environment_models": maps,
                    "robot_configs": [ROBOT_PARAMS],
                },
            },
        }
        self.write(MANIFEST_NAME, _dump_yaml(data))

    def inputs(self) -> None:
        cfg = self.cfg
        creator = [{"name": DEMO_CREATOR[0], "orcid": DEMO_CREATOR[1]}]
        header = _dump_yaml({"metadata": {"version": "1.2.0", "created": _INPUTS_CREATED, "license": "Apache-2.0"}})
        osc = "".join(f"# {line}\n" for line in header.splitlines())
        osc += (
            "import osc.standard\n\n"
            "scenario nav_to_pose:\n"
            "    robot: differential_drive_robot\n"
            "    do serial:\n"
            "        robot.init_pose(start_pose)\n"
            "        robot.nav_to_pose(goal_pose)\n"
        )
        self.write(ABSTRACT_SCENARIO, osc)
        vast = {
            "metadata": {
                "attribution": creator,
                "version": "0.4.1",
                "modified": _INPUTS_MODIFIED,
                "description": "Path, obstacle and costmap radius variation over the generated maps.",
                "agents": {
                    "navigation": {"parameters": ROBOT_PARAMS, "launch": ROBOT_LAUNCH},
                    "simulation": {"world": "environments/*/world.sdf"},
                },
            },
            "scenario": ABSTRACT_SCENARIO,
            "variations": [
                {"PathVariationRandom": {"num_paths": cfg.paths_per_map, "path_length": float(cfg.path_length_m)}},
                {"ObstacleVariation": {"densities": [float(d) for d in cfg.densities]}},
                {"ParameterVariationList": {"robot_radius": [float(r) for r in cfg.radii_m]}},
            ],
        }
        self.write(VARIATION_FILE, _dump_yaml(vast))
        for m in range(cfg.n_maps):
            w, h = _map_size(m)
            body = {
                "floorplan": {
                    "name": f"map_{m:02d}",
                    "width_m": w,
                    "height_m": h,
                    "rooms": [{"name": f"room_{i}", "x": i * w / 3, "w": w / 3} for i in range(3)],
                },
            }
            spec = _dump_yaml(body)
            meta = {
                "attribution": creator,
                "authors": creator,
                "created": _INPUTS_CREATED,
                "modified": _INPUTS_MODIFIED,
                "version": "1.0.0",
                "license": "CC-BY-4.0",
                "description": f"Indoor floor plan {m} with three rooms along one corridor.",
                "map_location": "university campus, building 1" if m == 0 else "synthetic",
                "size": len(spec.encode()),
            }
            self.write(f"inputs/maps/map_{m:02d}.fpm", _dump_yaml({"metadata": meta}) + spec)
        params = {
            "metadata": {"version": "1.1.0", "modified": _INPUTS_MODIFIED},
            "local_costmap": {"ros__parameters": {"robot_radius": float(cfg.radii_m[0]), "inflation_radius": 0.55}},
            "controller_server": {"ros__parameters": {"controller_frequency": 20.0}},
        }
        self.write(ROBOT_PARAMS, _dump_yaml(params))
        launch_header = _dump_yaml({"metadata": {"version": "1.1.0", "modified": _INPUTS_MODIFIED}})
        launch = "".join(f"# {line}\n" for line in launch_header.splitlines())
        launch += (
            "from launch import LaunchDescription\n\n\n"
            "def generate_launch_description():\n"
            "    return LaunchDescription([])\n"
        )
        self.write(ROBOT_LAUNCH, launch)

    def environments(self) -> None:
        for m in range(self.cfg.n_maps):
            w, h = _map_size(m)
            env = f"environments/map_{m:02d}"
            stamp = _stamp(_EPOCH - timedelta(days=1) + timedelta(minutes=m))
            gen = {
                "floorplan": f"inputs/maps/map_{m:02d}.fpm",
                "tool": "floorplan-dsl",
                "generated_at": stamp,
                "artifacts": {"mesh": "mesh.stl", "occupancy_grid": "occupancy.pgm", "world": "world.sdf"},
            }
            self.write(f"{env}/generation.yaml", _dump_yaml(gen))
            self.write(f"{env}/mesh.stl", _stl_box(f"map_{m:02d}", w, h))
            self.write(f"{env}/occupancy.pgm", _pgm(int(w * 2), int(h * 2)))
            self.write(
                f"{env}/world.sdf",
                f'<?xml version="1.0"?>\n<sdf version="1.9">\n  <world name="map_{m:02d}">\n'
                f'    <include><uri>mesh.stl</uri></include>\n  </world>\n</sdf>\n',
            )

    def path_of(self, c: _Config) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
        rng = _rng(self.cfg.seed, _TAG_PATH, c.map, c.path)
        w, h = _map_size(c.map)
        length = float(self.cfg.path_length_m)
        margin = 1.0
        for _ in range(1000):
            x0, y0 = rng.uniform(margin, w - margin), rng.uniform(margin, h - margin)
            yaw = rng.uniform(-math.pi, math.pi)
            x1, y1 = x0 + length * math.cos(yaw), y0 + length * math.sin(yaw)
            if margin <= x1 <= w - margin and margin <= y1 <= h - margin:
                return (x0, y0, yaw), (x1, y1, yaw)
        raise ValueError(f"path of {length} m does not fit map {c.map}")

    def config(self, c: _Config) -> list[tuple[float, float]]:
        cfg = self.cfg
        start, goal = self.path_of(c)
        n_obst = int((c.density * cfg.path_length_m).to_integral_value(ROUND_HALF_EVEN))
        rng = _rng(cfg.seed, _TAG_OBSTACLES, c.map, c.path, cfg.densities.index(c.density))
        obstacles = []
        for k in range(n_obst):
            f = (k + 1) / (n_obst + 1)
            off = rng.normal(0.0, 0.3)
            x = start[0] + f * (goal[0] - start[0]) - off * math.sin(start[2])
            y = start[1] + f * (goal[1] - start[1]) + off * math.cos(start[2])
            obstacles.append((x, y))
        seed = int(_rng(cfg.seed, _TAG_CONFIG, c.index).integers(0, 2**31))
        cdir = f"configs/{c.config_id}"
        pose = lambda p: " ".join(_fmt(v) for v in p)  # noqa: E731
        lines = [
            f"# concrete scenario {c.config_id}",
            f"map = inputs/maps/{c.map_name}.fpm",
            f"environment = environments/{c.map_name}",
            f"robot_config = {cdir}/robot/nav2_params.yaml",
            f"start_pose = {pose(start)}",
            f"goal_pose = {pose(goal)}",
            f"n_obstacles = {n_obst}",
            f"obstacle_poses = {'; '.join(pose(o) for o in obstacles)}",
            f"obstacle_density_per_m = {c.density}",
            f"path_length_m = {cfg.path_length_m}",
            f"robot_radius_m = {c.radius}",
            f"runs = {cfg.runs_per_config}",
            f"seed = {seed}",
        ]
        self.write(f"{cdir}/scenario.config", "\n".join(lines) + "\n")
        robot = {
            "metadata": {
                "version": f"1.1.0+{c.config_id}",
                "modified": _INPUTS_MODIFIED,
                "derived_from": ROBOT_PARAMS,
            },
            "local_costmap": {"ros__parameters": {"robot_radius": float(c.radius), "inflation_radius": 0.55}},
            "controller_server": {"ros__parameters": {"controller_frequency": 20.0}},
        }
        self.write(f"{cdir}/robot/nav2_params.yaml", _dump_yaml(robot))
        return obstacles

    def run(self, c: _Config, r: int) -> tuple[bool, float]:
        """Write one run directory; returns (success, ground-truth distance)."""
        cfg = self.cfg
        start, goal = self.path_of(c)
        rng = _rng(cfg.seed, _TAG_RUN, c.index, r)
        message = self.failures.get((c.index, r))
        success = message is None
        length = float(cfg.path_length_m)
        if success:
            reached = 1.0
        elif "spawn" in message:
            reached = 0.0
        else:
            reached = float(rng.uniform(0.3, 0.8))
        nominal = length * reached / _SPEED_MPS
        duration = round(nominal + float(rng.uniform(2.0, 6.0)), 3)
        slot = c.index * cfg.runs_per_config + r
        started = _EPOCH + timedelta(seconds=slot * _RUN_SLOT_S)
        rdir = f"configs/{c.config_id}/runs/run_{r:03d}"
        outcome = TestOutcome(success, Decimal(str(duration)), _stamp(started), "", message)
        self.write(f"{rdir}/test.xml", write_test_report(outcome))

        n = max(2, int(duration * _RATE_HZ) + 1)
        t = np.arange(n) / _RATE_HZ
        frac = np.clip(t * _SPEED_MPS / length, 0.0, reached)
        gx = start[0] + frac * (goal[0] - start[0])
        gy = start[1] + frac * (goal[1] - start[1])
        noise = rng.normal(0.0, cfg.noise_sigma_m, size=(2, n))
        ex, ey = gx + noise[0], gy + noise[1]
        yaw = _fmt(start[2], 4)
        rows = ["t,gt_x,gt_y,gt_yaw,est_x,est_y,est_yaw"]
        rows += [
            f"{t[i]:.1f},{gx[i]:.4f},{gy[i]:.4f},{yaw},{ex[i]:.4f},{ey[i]:.4f},{yaw}"
            for i in range(n)
        ]
        self.write(f"{rdir}/postprocess/poses.csv", "\n".join(rows) + "\n")
        distance = length * reached
        rmse = float(np.sqrt(np.mean(noise[0] ** 2 + noise[1] ** 2)))
        metrics = {"distance_m": round(distance, 3), "position_rmse_m": round(rmse, 4), "success": success}
        self.write(f"{rdir}/postprocess/metrics.json", json.dumps(metrics, sort_keys=True, indent=1) + "\n")

        bag = f"rosbag/run_{r:03d}.mcap"
        self.write(f"{rdir}/{bag}", b"\x89MCAP0\r\n" + f"{c.config_id}/{r}:{n}".encode() + b"\x89MCAP0\r\n")
        log = [f"[{_stamp(started)}] [INFO] launching {ROBOT} with {c.config_id}"]
        log.append(f"[{_stamp(started)}] [{'INFO' if success else 'ERROR'}] {message or 'goal reached'}")
        self.write(f"{rdir}/logs/launch.log", "\n".join(log) + "\n")
        meta = {
            "system": {
                "hardware": "x86_64, 16 cores, 32 GiB RAM",
                "middleware_distribution": "jazzy",
                "runtime_environment": "docker ros:jazzy-ros-base",
            },
            "bag": {
                "path": bag,
                "middleware_version": "ROS 2 Jazzy",
                "messages": [
                    {"type": "nav_msgs/msg/Odometry", "count": n},
                    {"type": "sensor_msgs/msg/LaserScan", "count": n},
                    {"type": "tf2_msgs/msg/TFMessage", "count": 2 * n},
                ],
            },
            "postprocessing": [
                {
                    "plugin": "rosbag_to_csv",
                    "parameters": {"topics": ["/odom", "/ground_truth"], "rate_hz": _RATE_HZ},
                    "inputs": [bag],
                    "outputs": ["postprocess/poses.csv"],
                },
                {
                    "plugin": "navigation_metrics",
                    "parameters": {"distance_threshold_m": 0.25},
                    "inputs": ["postprocess/poses.csv"],
                    "outputs": ["postprocess/metrics.json"],
                },
            ],
        }
        self.write(f"{rdir}/metadata.yaml", _dump_yaml(meta))
        return success, distance


def _stl_box(name: str, w: float, h: float) -> str:
    facets = []
    corners = [(0, 0, 0), (w, 0, 0), (w, h, 0), (0, h, 0)]
    for a, b, c in ((0, 1, 2), (0, 2, 3)):
        facets.append(
            "  facet normal 0 0 1\n    outer loop\n"
            + "".join(f"      vertex {corners[i][0]:.1f} {corners[i][1]:.1f} {corners[i][2]:.1f}\n" for i in (a, b, c))
            + "    endloop\n  endfacet\n"
        )
    return f"solid {name}\n" + "".join(facets) + f"endsolid {name}\n"


def _pgm(w: int, h: int) -> str:
    rows = []
    for y in range(h):
        rows.append(" ".join("0" if x in (0, w - 1) or y in (0, h - 1) else "254" for x in range(w)))
    return f"P2\n{w} {h}\n255\n" + "\n".join(rows) + "\n"


def generate(config: HarnessConfig, out_dir: str | Path, *, workers: int = 1) -> HarnessSummary:
    """Write the campaign tree for ``config`` into an empty ``out_dir``."""
    root = Path(out_dir)
    if root.exists() and any(root.iterdir()):
        raise OutputNotEmpty(f"{root} is not empty")
    root.mkdir(parents=True, exist_ok=True)
    w = _Writer(config, root)
    w.manifest()
    w.inputs()
    w.environments()
    for c in w.configs:
        w.config(c)
    jobs = [(c, r) for c in w.configs for r in range(config.runs_per_config)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda j: w.run(*j), jobs))
    else:
        results = [w.run(*j) for j in jobs]
    failed = sum(1 for ok, _ in results if not ok)
    distance = sum(Decimal(str(round(d, 3))) for _, d in results)
    return HarnessSummary(len(w.configs), len(jobs), failed, distance)
