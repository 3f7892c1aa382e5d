"""Campaign manifest parsing, results-tree scanning and metadata collectors.

Results tree layout::

    <root>/campaign.vast.yaml
    <root>/inputs/...                       root input files
    <root>/environments/<map>/generation.yaml + generated artifacts
    <root>/configs/<config_id>/scenario.config
    <root>/configs/<config_id>/robot/...    configured robot files
    <root>/configs/<config_id>/runs/<run_id>/{test.xml, metadata.yaml, rosbag/, logs/, ...}
"""

from __future__ import annotations

import logging
import re
import xml.etree.ElementTree as ET
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping

import yaml

from .errors import (
    FairProvError,
    LayoutViolation,
    MalformedManifest,
    MalformedReport,
    MissingRequiredField,
    MissingTimestamp,
    PluginFailure,
)
from .identity import BaseIri, RelPath
from .ldgraph import LinkedDocument, Literal, parse_datetime

log = logging.getLogger(__name__)

try:
    _Loader = yaml.CSafeLoader
except AttributeError:  # pragma: no cover - libyaml missing
    _Loader = yaml.SafeLoader

MANIFEST_NAME = "campaign.vast.yaml"
SCENARIO_CONFIG = "scenario.config"
TEST_REPORT = "test.xml"
RUN_METADATA = "metadata.yaml"
ENV_GENERATION = "generation.yaml"

ARTIFACT_KINDS = ("bag", "log", "test-report", "config", "csv", "video", "other")
LEVELS = ("campaign", "configuration", "run", "postprocess")

_SPDX = re.compile(r"^[A-Za-z0-9][A-Za-z0-9.+\-]*$")


def load_yaml(text: str | bytes) -> Any:
    return yaml.load(text, Loader=_Loader)


def utc_stamp(value: object) -> str:
    """Normalise a timestamp (datetime or ISO string) to canonical UTC ``...Z`` form."""
    if isinstance(value, datetime):
        dt = value if value.tzinfo else value.replace(tzinfo=timezone.utc)
        return Literal(dt.isoformat(), "dateTime").lexical
    text = str(value).strip()
    if re.search(r"(Z|[+-]\d\d:?\d\d)$", text) is None:
        text += "Z"
    return Literal(text, "dateTime").lexical


# ---------------------------------------------------------------------------
# manifest


@dataclass(frozen=True)
class Creator:
    name: str
    orcid: str | None = None


@dataclass(frozen=True)
class DistributionSpec:
    filename_template: str
    include_filter: tuple[str, ...]
    name: str = "distribution"

    def __post_init__(self) -> None:
        if not self.include_filter:
            raise MalformedManifest("distribution needs at least one include_filter glob")
        for pattern in self.include_filter:
            parts = pattern.replace("\\", "/").split("/")
            if pattern.startswith("/") or ".." in parts:
                raise MalformedManifest(f"include_filter glob must be relative: {pattern!r}")


@dataclass(frozen=True)
class DatasetMetadata:
    title: str
    license: str
    dataset_iri: BaseIri
    creators: tuple[Creator, ...]
    description: str = ""
    keywords: tuple[str, ...] = ()


@dataclass(frozen=True)
class RobotSpec:
    name: str = "robot"
    parameters: str | None = None
    launch: str | None = None
    model: str | None = None


@dataclass(frozen=True)
class InputsSpec:
    abstract_scenario: str | None = None
    variation_file: str | None = None
    environment_models: tuple[str, ...] = ()
    robot_configs: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExecutionSpec:
    runs: int = 1
    seed: int | None = None
    path_length_m: Decimal | None = None
    obstacle_densities_per_m: tuple[Decimal, ...] = ()
    robot_radii_m: tuple[Decimal, ...] = ()
    robot: RobotSpec = field(default_factory=RobotSpec)
    inputs: InputsSpec = field(default_factory=InputsSpec)
    software_agents: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class CampaignManifest:
    metadata: DatasetMetadata
    publication: tuple[DistributionSpec, ...] = ()
    execution: ExecutionSpec = field(default_factory=ExecutionSpec)
    warnings: tuple[str, ...] = ()

    @property
    def base(self) -> BaseIri:
        return self.metadata.dataset_iri


_META_KEYS = {"title", "description", "creators", "keywords", "license", "dataset_iri"}
_TOP_KEYS = {"metadata", "publication", "execution"}
_EXEC_KEYS = {"runs", "seed", "variation", "agents", "inputs", "software_agents"}


def _decimal(value: object, where: str) -> Decimal:
    try:
        return Decimal(str(value))
    except InvalidOperation:
        raise MalformedManifest(f"{where}: not a number: {value!r}") from None


def _creators(raw: object) -> tuple[Creator, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise MalformedManifest("metadata.creators must be a list")
    out = []
    for item in raw:
        if isinstance(item, str):
            out.append(Creator(item))
        elif isinstance(item, Mapping):
            name = item.get("name")
            if not name:
                raise MalformedManifest(f"creator without name: {item!r}")
            orcid = item.get("orcid")
            out.append(Creator(str(name), str(orcid) if orcid else None))
        else:
            raise MalformedManifest(f"invalid creator entry {item!r}")
    return tuple(out)


def _distributions(raw: object, warnings: list[str]) -> tuple[DistributionSpec, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise MalformedManifest("publication must be a list")
    out = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, Mapping) or len(entry) != 1:
            raise MalformedManifest(f"publication[{i}] must be a single-key mapping")
        (kind, body), = entry.items()
        if kind != "zip":
            raise MalformedManifest(f"publication[{i}]: unsupported distribution type {kind!r}")
        if not isinstance(body, Mapping):
            raise MalformedManifest(f"publication[{i}].zip must be a mapping")
        for key in set(body) - {"filename", "include_filter", "name"}:
            warnings.append(f"publication[{i}].zip: unknown key {key!r}")
        template = body.get("filename")
        if not template:
            raise MissingRequiredField(f"publication[{i}].zip.filename")
        globs = body.get("include_filter") or []
        if isinstance(globs, str):
            globs = [globs]
        out.append(
            DistributionSpec(
                str(template),
                tuple(str(g) for g in globs),
                str(body.get("name") or f"distribution_{i}"),
            )
        )
    return tuple(out)


def _execution(raw: object, warnings: list[str]) -> ExecutionSpec:
    if raw is None:
        return ExecutionSpec()
    if not isinstance(raw, Mapping):
        raise MalformedManifest("execution must be a mapping")
    for key in set(raw) - _EXEC_KEYS:
        warnings.append(f"execution: unknown key {key!r}")
    runs = raw.get("runs", 1)
    if not isinstance(runs, int) or isinstance(runs, bool) or runs < 1:
        raise MalformedManifest(f"execution.runs must be an integer >= 1, got {runs!r}")
    variation = raw.get("variation") or {}
    path_length = variation.get("path_length_m")
    densities = variation.get("obstacle_densities_per_m") or []
    radii = variation.get("robot_radii_m") or []
    robot_raw = (raw.get("agents") or {}).get("robot") or {}
    inputs_raw = raw.get("inputs") or {}
    return ExecutionSpec(
        runs=runs,
        seed=raw.get("seed"),
        path_length_m=_decimal(path_length, "path_length_m") if path_length is not None else None,
        obstacle_densities_per_m=tuple(_decimal(d, "obstacle_densities_per_m") for d in densities),
        robot_radii_m=tuple(_decimal(r, "robot_radii_m") for r in radii),
        robot=RobotSpec(
            name=str(robot_raw.get("name", "robot")),
            parameters=robot_raw.get("parameters"),
            launch=robot_raw.get("launch"),
            model=robot_raw.get("model"),
        ),
        inputs=InputsSpec(
            abstract_scenario=inputs_raw.get("abstract_scenario"),
            variation_file=inputs_raw.get("variation_file"),
            environment_models=tuple(inputs_raw.get("environment_models") or ()),
            robot_configs=tuple(inputs_raw.get("robot_configs") or ()),
        ),
        software_agents=dict(raw.get("software_agents") or {}),
    )


def parse_manifest(data: bytes | str) -> CampaignManifest:
    try:
        raw = load_yaml(data)
    except yaml.YAMLError as exc:
        raise MalformedManifest(f"invalid YAML: {exc}") from None
    if not isinstance(raw, Mapping):
        raise MalformedManifest("manifest must be a mapping")
    warnings = [f"unknown top-level key {k!r}" for k in sorted(set(raw) - _TOP_KEYS)]
    meta = raw.get("metadata")
    if not isinstance(meta, Mapping):
        raise MissingRequiredField("metadata")
    for key in sorted(set(meta) - _META_KEYS):
        warnings.append(f"metadata: unknown key {key!r}")
    for key in ("title", "license", "dataset_iri", "creators"):
        if not meta.get(key):
            raise MissingRequiredField(key)
    license_id = str(meta["license"]).strip()
    if not _SPDX.match(license_id):
        raise MalformedManifest(f"license is not an SPDX-style identifier: {license_id!r}")
    try:
        base = BaseIri(str(meta["dataset_iri"]))
    except FairProvError as exc:
        raise MalformedManifest(f"dataset_iri: {exc}") from None
    keywords = meta.get("keywords") or []
    if isinstance(keywords, str):
        keywords = [keywords]
    metadata = DatasetMetadata(
        title=str(meta["title"]),
        license=license_id,
        dataset_iri=base,
        creators=_creators(meta["creators"]),
        description=str(meta.get("description") or ""),
        keywords=tuple(str(k) for k in keywords),
    )
    manifest = CampaignManifest(
        metadata=metadata,
        publication=_distributions(raw.get("publication"), warnings),
        execution=_execution(raw.get("execution"), warnings),
        warnings=tuple(warnings),
    )
    for w in manifest.warnings:
        log.warning("manifest: %s", w)
    return manifest


# ---------------------------------------------------------------------------
# test reports


@dataclass(frozen=True)
class TestOutcome:
    success: bool
    duration: Decimal
    started: str
    ended: str
    message: str | None = None

    __test__ = False  # not a pytest class


def parse_test_report(data: bytes | str) -> TestOutcome:
    """Outcome of a JUnit-style report: success iff no failures or errors are recorded."""
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise MalformedReport(f"invalid XML: {exc}") from None
    if root.tag == "testsuites":
        suites = root.findall("testsuite")
    elif root.tag == "testsuite":
        suites = [root]
    else:
        raise MalformedReport(f"unexpected root element <{root.tag}>")
    if not suites:
        raise MalformedReport("no <testsuite> element")
    suite = suites[0]
    stamp = suite.get("timestamp")
    if not stamp:
        raise MissingTimestamp("testsuite has no timestamp attribute")
    try:
        started = utc_stamp(stamp)
        duration = Decimal(suite.get("time", "0"))
        failures = sum(int(s.get("failures", "0")) + int(s.get("errors", "0")) for s in suites)
    except (ValueError, InvalidOperation) as exc:
        raise MalformedReport(str(exc)) from None
    if duration < 0:
        raise MalformedReport(f"negative duration {duration}")
    bad = [el for s in suites for el in s.iter() if el.tag in ("failure", "error")]
    failures = max(failures, len(bad))
    start_dt = parse_datetime(started)
    ended = utc_stamp(start_dt + timedelta(seconds=float(duration)))
    message = bad[0].get("message") if bad else None
    return TestOutcome(failures == 0, duration, started, ended, message)


def write_test_report(
    outcome: TestOutcome, suite_name: str = "nav_to_pose", case_name: str = "run"
) -> bytes:
    """Reference writer for the report format; parse_test_report inverts it."""
    suite = ET.Element(
        "testsuite",
        {
            "name": suite_name,
            "tests": "1",
            "failures": "0" if outcome.success else "1",
            "errors": "0",
            "time": str(outcome.duration),
            "timestamp": outcome.started,
        },
    )
    case = ET.SubElement(
        suite, "testcase", {"classname": f"robovast.{suite_name}", "name": case_name, "time": str(outcome.duration)}
    )
    if not outcome.success:
        failure = ET.SubElement(case, "failure", {"message": outcome.message or "goal not reached"})
        failure.text = outcome.message or "goal not reached"
    root = ET.Element("testsuites")
    root.append(suite)
    ET.indent(root)
    return b'<?xml version="1.0" encoding="utf-8"?>\n' + ET.tostring(root, encoding="utf-8") + b"\n"


# ---------------------------------------------------------------------------
# scanning


@dataclass(frozen=True)
class Artifact:
    path: str
    kind: str
    size: int


@dataclass(frozen=True)
class PostprocessStep:
    plugin: str
    parameters: tuple[tuple[str, str], ...]
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]


@dataclass(frozen=True)
class RunRecord:
    run_dir: str
    config_id: str
    success: bool
    duration: Decimal
    started: str
    ended: str
    system: Mapping[str, str]
    bag_meta: Mapping[str, Any]
    artifacts: tuple[Artifact, ...]
    postprocessing: tuple[PostprocessStep, ...] = ()
    message: str | None = None

    def artifact(self, kind: str) -> list[Artifact]:
        return [a for a in self.artifacts if a.kind == kind]


@dataclass(frozen=True)
class Pose:
    x: Decimal
    y: Decimal
    yaw: Decimal

    def __str__(self) -> str:
        return f"{self.x} {self.y} {self.yaw}"


@dataclass(frozen=True)
class ConfigRecord:
    config_id: str
    config_dir: str
    map_ref: str
    environment: str | None
    robot_config: str | None
    start_pose: Pose
    goal_pose: Pose
    n_obstacles: int
    obstacle_poses: tuple[Pose, ...]
    robot_radius_m: Decimal
    path_length_m: Decimal | None
    obstacle_density_per_m: Decimal | None
    runs: int
    seed: int | None
    params: Mapping[str, str]
    robot_meta: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class InputRecord:
    path: str
    kind: str
    metadata: Mapping[str, Any]


@dataclass(frozen=True)
class EnvironmentRecord:
    env_dir: str
    map_ref: str
    tool: str
    generated_at: str
    artifacts: Mapping[str, Artifact]


@dataclass
class ScanResult:
    root: Path
    configs: list[ConfigRecord] = field(default_factory=list)
    runs: list[RunRecord] = field(default_factory=list)
    inputs: list[InputRecord] = field(default_factory=list)
    environments: list[EnvironmentRecord] = field(default_factory=list)
    violations: list[LayoutViolation] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        return {
            "configs": len(self.configs),
            "runs": len(self.runs),
            "inputs": len(self.inputs),
            "environments": len(self.environments),
            "violations": len(self.violations),
        }

    def runs_of(self, config_id: str) -> list[RunRecord]:
        return [r for r in self.runs if r.config_id == config_id]

    def raise_for_violations(self) -> None:
        if self.violations:
            raise self.violations[0]


def _rel(root: Path, path: Path) -> str:
    return path.relative_to(root).as_posix()


def classify_artifact(rel: str) -> str:
    parts = rel.split("/")
    name = parts[-1]
    if name == TEST_REPORT:
        return "test-report"
    if "rosbag" in parts[:-1] or name.endswith((".mcap", ".db3", ".bag")):
        return "bag"
    if "logs" in parts[:-1] or name.endswith(".log"):
        return "log"
    if name.endswith(".csv"):
        return "csv"
    if name.endswith((".mp4", ".webm", ".avi", ".mkv")):
        return "video"
    if name.endswith((".config", ".launch.py", ".urdf")) or (name.endswith((".yaml", ".yml")) and name != RUN_METADATA):
        return "config"
    return "other"


def parse_pose(text: str) -> Pose:
    """``x y [yaw]``; a missing yaw is materialised as 0."""
    parts = text.replace(",", " ").split()
    if len(parts) not in (2, 3):
        raise ValueError(f"pose needs 2 or 3 numbers, got {text!r}")
    nums = [Decimal(p) for p in parts] + [Decimal("0")] * (3 - len(parts))
    return Pose(*nums)


def parse_scenario_config(text: str) -> dict[str, str]:
    params: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected key = value")
        params[key.strip()] = value.strip()
    return params


def _config_record(
    root: Path, cfg_dir: Path, manifest: CampaignManifest, params: dict[str, str]
) -> ConfigRecord:
    ex = manifest.execution
    if "map" not in params:
        raise ValueError("scenario.config has no map reference")
    obstacle_poses = tuple(
        parse_pose(p) for p in params.get("obstacle_poses", "").split(";") if p.strip()
    )
    n_obstacles = int(params.get("n_obstacles", len(obstacle_poses)))
    default_radius = ex.robot_radii_m[0] if ex.robot_radii_m else Decimal("0.22")
    radius = Decimal(params.get("robot_radius_m", str(default_radius)))
    path_length = params.get("path_length_m")
    density = params.get("obstacle_density_per_m")
    seed = params.get("seed")
    materialized = dict(params)
    start = parse_pose(params.get("start_pose", "0 0 0"))
    goal = parse_pose(params.get("goal_pose", "0 0 0"))
    materialized.update(
        start_pose=str(start),
        goal_pose=str(goal),
        n_obstacles=str(n_obstacles),
        robot_radius_m=str(radius),
        runs=params.get("runs", str(ex.runs)),
    )
    robot_config = params.get("robot_config")
    robot_meta = {}
    if robot_config:
        robot_path = root / robot_config
        if not robot_path.is_file():
            raise ValueError(f"robot_config {robot_config!r} does not exist")
        robot_meta = read_header_metadata(robot_path)
    return ConfigRecord(
        config_id=cfg_dir.name,
        config_dir=_rel(root, cfg_dir),
        map_ref=params["map"],
        environment=params.get("environment"),
        robot_config=robot_config,
        start_pose=start,
        goal_pose=goal,
        n_obstacles=n_obstacles,
        obstacle_poses=obstacle_poses,
        robot_radius_m=radius,
        path_length_m=Decimal(path_length) if path_length else ex.path_length_m,
        obstacle_density_per_m=Decimal(density) if density else None,
        runs=int(materialized["runs"]),
        seed=int(seed) if seed else None,
        params=materialized,
        robot_meta=robot_meta,
    )


def _postprocessing(raw: object) -> tuple[PostprocessStep, ...]:
    steps = []
    for item in raw or []:
        params = item.get("parameters") or {}
        steps.append(
            PostprocessStep(
                plugin=str(item["plugin"]),
                parameters=tuple(sorted((str(k), _param_str(v)) for k, v in params.items())),
                inputs=tuple(item.get("inputs") or ()),
                outputs=tuple(item.get("outputs") or ()),
            )
        )
    return tuple(steps)


def _param_str(value: object) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


def scan_run(root: Path, run_dir: Path, config_id: str) -> RunRecord:
    report = run_dir / TEST_REPORT
    if not report.is_file():
        raise LayoutViolation(_rel(root, run_dir), f"missing {TEST_REPORT}")
    meta_path = run_dir / RUN_METADATA
    if not meta_path.is_file():
        raise LayoutViolation(_rel(root, run_dir), f"missing {RUN_METADATA}")
    try:
        outcome = parse_test_report(report.read_bytes())
    except MalformedReport as exc:
        raise LayoutViolation(_rel(root, report), str(exc)) from None
    try:
        meta = load_yaml(meta_path.read_bytes()) or {}
    except yaml.YAMLError as exc:
        raise LayoutViolation(_rel(root, meta_path), f"invalid YAML: {exc}") from None
    artifacts = []
    for path in sorted(p for p in run_dir.rglob("*") if p.is_file()):
        rel = _rel(root, path)
        artifacts.append(Artifact(rel, classify_artifact(rel), path.stat().st_size))
    system = {k: str(v) for k, v in (meta.get("system") or {}).items()}
    try:
        steps = _postprocessing(meta.get("postprocessing"))
    except (KeyError, AttributeError, TypeError) as exc:
        raise LayoutViolation(_rel(root, meta_path), f"invalid postprocessing block: {exc}") from None
    run_rel = _rel(root, run_dir)
    steps = tuple(
        PostprocessStep(
            s.plugin,
            s.parameters,
            tuple(f"{run_rel}/{p}" for p in s.inputs),
            tuple(f"{run_rel}/{p}" for p in s.outputs),
        )
        for s in steps
    )
    return RunRecord(
        run_dir=run_rel,
        config_id=config_id,
        success=outcome.success,
        duration=outcome.duration,
        started=outcome.started,
        ended=outcome.ended,
        system=system,
        bag_meta=meta.get("bag") or {},
        artifacts=tuple(artifacts),
        postprocessing=steps,
        message=outcome.message,
    )


def read_header_metadata(path: Path) -> dict[str, Any]:
    """The ``metadata`` block of a YAML input, or of a ``#``-comment header in other files."""
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".yaml", ".yml", ".fpm", ".vast"):
        try:
            data = load_yaml(text)
        except yaml.YAMLError:
            return {}
    else:
        header = []
        for line in text.splitlines():
            if not line.startswith("#"):
                break
            header.append(line[2:] if line.startswith("# ") else line[1:])
        try:
            data = load_yaml("\n".join(header)) if header else None
        except yaml.YAMLError:
            return {}
    meta = data.get("metadata") if isinstance(data, Mapping) else None
    return dict(meta) if isinstance(meta, Mapping) else {}


def _scan_inputs(root: Path, manifest: CampaignManifest, result: ScanResult) -> None:
    spec = manifest.execution.inputs
    declared: list[tuple[str, str]] = []
    if spec.abstract_scenario:
        declared.append((spec.abstract_scenario, "abstract-scenario"))
    if spec.variation_file:
        declared.append((spec.variation_file, "variation"))
    declared += [(p, "environment-model") for p in spec.environment_models]
    declared += [(p, "robot-config") for p in spec.robot_configs]
    robot = manifest.execution.robot
    for extra in (robot.launch, robot.model, robot.parameters):
        if extra and extra not in {p for p, _ in declared}:
            declared.append((extra, "robot-config"))
    for rel, kind in declared:
        path = root / rel
        if not path.is_file():
            result.violations.append(LayoutViolation(rel, f"declared {kind} input is missing"))
            continue
        result.inputs.append(InputRecord(rel, kind, read_header_metadata(path)))
    result.inputs.sort(key=lambda r: r.path)


def _scan_environments(root: Path, result: ScanResult) -> None:
    env_root = root / "environments"
    if not env_root.is_dir():
        return
    for env_dir in sorted(p for p in env_root.iterdir() if p.is_dir()):
        gen = env_dir / ENV_GENERATION
        rel = _rel(root, env_dir)
        if not gen.is_file():
            result.violations.append(LayoutViolation(rel, f"missing {ENV_GENERATION}"))
            continue
        try:
            data = load_yaml(gen.read_bytes()) or {}
            artifacts = {}
            for role, name in sorted((data.get("artifacts") or {}).items()):
                path = env_dir / name
                if not path.is_file():
                    raise LayoutViolation(_rel(root, path), "declared environment artifact missing")
                artifacts[role] = Artifact(_rel(root, path), "other", path.stat().st_size)
            result.environments.append(
                EnvironmentRecord(
                    env_dir=rel,
                    map_ref=str(data["floorplan"]),
                    tool=str(data.get("tool", "floorplan-dsl")),
                    generated_at=utc_stamp(data["generated_at"]),
                    artifacts=artifacts,
                )
            )
        except LayoutViolation as exc:
            result.violations.append(exc)
        except (KeyError, ValueError, yaml.YAMLError) as exc:
            result.violations.append(LayoutViolation(_rel(root, gen), f"invalid: {exc}"))


def _scan_stray_runs(root: Path, result: ScanResult) -> None:
    for report in sorted(root.rglob(TEST_REPORT)):
        parts = report.relative_to(root).parts
        if not (len(parts) == 5 and parts[0] == "configs" and parts[2] == "runs"):
            result.violations.append(
                LayoutViolation(_rel(root, report.parent), "run outside a configuration directory")
            )


def scan_campaign(
    results_root: str | Path, manifest: CampaignManifest, *, workers: int = 1
) -> ScanResult:
    """Walk the results tree; layout problems are accumulated, never fail-fast."""
    root = Path(results_root)
    if not root.is_dir():
        raise FileNotFoundError(root)
    result = ScanResult(root)
    _scan_inputs(root, manifest, result)
    _scan_environments(root, result)
    _scan_stray_runs(root, result)
    cfg_root = root / "configs"
    cfg_dirs = sorted(p for p in cfg_root.iterdir() if p.is_dir()) if cfg_root.is_dir() else []
    jobs: list[tuple[Path, str]] = []
    for cfg_dir in cfg_dirs:
        scfg = cfg_dir / SCENARIO_CONFIG
        if not scfg.is_file():
            result.violations.append(LayoutViolation(_rel(root, cfg_dir), f"missing {SCENARIO_CONFIG}"))
            continue
        try:
            params = parse_scenario_config(scfg.read_text(encoding="utf-8"))
            result.configs.append(_config_record(root, cfg_dir, manifest, params))
        except (ValueError, InvalidOperation) as exc:
            result.violations.append(LayoutViolation(_rel(root, scfg), str(exc)))
            continue
        runs_dir = cfg_dir / "runs"
        if runs_dir.is_dir():
            jobs.extend((d, cfg_dir.name) for d in sorted(runs_dir.iterdir()) if d.is_dir())

    def work(job: tuple[Path, str]) -> RunRecord | LayoutViolation:
        try:
            return scan_run(root, *job)
        except LayoutViolation as exc:
            return exc

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outcomes = list(pool.map(work, jobs))
    else:
        outcomes = [work(j) for j in jobs]
    for item in outcomes:
        if isinstance(item, LayoutViolation):
            result.violations.append(item)
        else:
            result.runs.append(item)
    result.runs.sort(key=lambda r: r.run_dir)
    result.violations.sort(key=lambda v: (v.path, v.message))
    return result


# ---------------------------------------------------------------------------
# collector plugins


@dataclass
class CollectContext:
    manifest: CampaignManifest
    scan: ScanResult
    config: ConfigRecord | None = None
    run: RunRecord | None = None

    @property
    def base(self) -> BaseIri:
        return self.manifest.base

    def fragment(self) -> LinkedDocument:
        from .vocab import DEFAULT_TABLE

        return LinkedDocument(DEFAULT_TABLE.with_base(self.base.value))


Collector = Callable[[CollectContext], LinkedDocument]


@dataclass(frozen=True)
class CollectorPlugin:
    name: str
    level: str
    collect: Collector

    def __post_init__(self) -> None:
        if self.level not in LEVELS:
            raise ValueError(f"unknown plugin level {self.level!r}")


class PluginRegistry:
    def __init__(self, plugins: Iterable[CollectorPlugin] = ()) -> None:
        self._plugins: dict[str, CollectorPlugin] = {}
        for p in plugins:
            self.register(p)

    def register(self, plugin: CollectorPlugin) -> None:
        if plugin.name in self._plugins:
            raise ValueError(f"plugin {plugin.name!r} already registered")
        self._plugins[plugin.name] = plugin

    def __iter__(self):
        return iter(sorted(self._plugins.values(), key=lambda p: (LEVELS.index(p.level), p.name)))

    def __len__(self) -> int:
        return len(self._plugins)

    def __contains__(self, name: str) -> bool:
        return name in self._plugins


@dataclass
class CollectionResult:
    fragments: list[tuple[str, LinkedDocument]] = field(default_factory=list)
    failures: list[PluginFailure] = field(default_factory=list)

    def documents(self) -> list[LinkedDocument]:
        return [doc for _, doc in self.fragments]

    def levels(self) -> set[str]:
        return {level for level, _ in self.fragments}


def run_collectors(registry: PluginRegistry, context: CollectContext) -> CollectionResult:
    """Run every plugin at its level; a failing plugin is recorded and skipped."""
    if not len(registry):
        raise ValueError("empty plugin registry")
    result = CollectionResult()
    scan = context.scan
    for plugin in registry:
        if plugin.level == "campaign":
            targets = [(CollectContext(context.manifest, scan), "campaign")]
        elif plugin.level == "configuration":
            targets = [(CollectContext(context.manifest, scan, config=c), c.config_dir) for c in scan.configs]
        else:
            configs = {c.config_id: c for c in scan.configs}
            targets = [
                (CollectContext(context.manifest, scan, config=configs.get(r.config_id), run=r), r.run_dir)
                for r in scan.runs
            ]
        for ctx, target in targets:
            try:
                doc = plugin.collect(ctx)
            except Exception as exc:  # noqa: BLE001 - isolation is the contract
                failure = PluginFailure(plugin.name, exc, target)
                log.error("%s", failure)
                result.failures.append(failure)
                continue
            if doc is not None and len(doc):
                result.fragments.append((plugin.level, doc))
    return result
