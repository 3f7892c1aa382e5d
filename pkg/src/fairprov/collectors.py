"""Built-in metadata collection plugins, one per hierarchy level."""

from __future__ import annotations

from .capture import CollectContext, CollectorPlugin, PluginRegistry
from .identity import DatasetNaming
from .ldgraph import LinkedDocument, Literal
from .vocab import PROV, ROBOVAST

ROBOVAST_AGENT = "robovast"


def _naming(ctx: CollectContext) -> DatasetNaming:
    return DatasetNaming(ctx.base, dict(ctx.manifest.execution.software_agents))


def campaign_info(ctx: CollectContext) -> LinkedDocument:
    """Planned run count, execution window and campaign-wide parameters."""
    doc = ctx.fragment()
    naming = _naming(ctx)
    scan = ctx.scan
    node = doc.node(naming.campaign, ROBOVAST.Campaign, PROV.Activity)
    node.add(ROBOVAST.n_configs, Literal.of(len(scan.configs)))
    node.add(ROBOVAST.n_runs, Literal.of(sum(c.runs for c in scan.configs)))
    if scan.runs:
        node.set(PROV.startedAtTime, Literal(min(r.started for r in scan.runs), "dateTime"))
        node.set(PROV.endedAtTime, Literal(max(r.ended for r in scan.runs), "dateTime"))
    ex = ctx.manifest.execution
    params = {"runs_per_config": ex.runs}
    if ex.seed is not None:
        params["seed"] = ex.seed
    if ex.path_length_m is not None:
        params["path_length_m"] = ex.path_length_m
    if ex.obstacle_densities_per_m:
        params["obstacle_densities_per_m"] = ",".join(map(str, ex.obstacle_densities_per_m))
    if ex.robot_radii_m:
        params["robot_radii_m"] = ",".join(map(str, ex.robot_radii_m))
    for key, value in params.items():
        node.add(ROBOVAST.parameter, Literal(f"{key}={value}"))
    node.add(PROV.used, naming.element("campaign.vast.yaml"))
    node.add(PROV.wasAssociatedWith, naming.agent(ROBOVAST_AGENT))
    return doc


def scenario_parameters(ctx: CollectContext) -> LinkedDocument:
    doc = ctx.fragment()
    naming = _naming(ctx)
    cfg = ctx.config
    assert cfg is not None
    node = doc.node(naming.element(cfg.config_dir))
    node.add(ROBOVAST.n_obstacles, Literal.of(cfg.n_obstacles))
    node.add(ROBOVAST.robotRadius, Literal.of(cfg.robot_radius_m))
    node.add(ROBOVAST.n_runs, Literal.of(cfg.runs))
    node.add(ROBOVAST.startPose, Literal(str(cfg.start_pose)))
    node.add(ROBOVAST.goalPose, Literal(str(cfg.goal_pose)))
    for pose in cfg.obstacle_poses:
        node.add(ROBOVAST.obstaclePose, Literal(str(pose)))
    if cfg.path_length_m is not None:
        node.add(ROBOVAST.pathLength, Literal.of(cfg.path_length_m))
    if cfg.obstacle_density_per_m is not None:
        node.add(ROBOVAST.obstacleDensity, Literal.of(cfg.obstacle_density_per_m))
    if cfg.seed is not None:
        node.add(ROBOVAST.seed, Literal.of(cfg.seed))
    if cfg.robot_config:
        robot = doc.node(naming.robot_configuration(cfg.config_dir))
        robot.add(ROBOVAST.robotRadius, Literal.of(cfg.robot_radius_m))
    return doc


def test_outcome(ctx: CollectContext) -> LinkedDocument:
    doc = ctx.fragment()
    run = ctx.run
    assert run is not None
    node = doc.node(_naming(ctx).element(run.run_dir))
    node.set(ROBOVAST.success, Literal.of(run.success))
    node.set(PROV.startedAtTime, Literal(run.started, "dateTime"))
    node.set(PROV.endedAtTime, Literal(run.ended, "dateTime"))
    node.add(ROBOVAST.duration, Literal.of(run.duration))
    return doc


test_outcome.__test__ = False  # type: ignore[attr-defined]

_SYSTEM_KEYS = {
    "hardware": ROBOVAST.hardware,
    "middleware_distribution": ROBOVAST.middlewareDistribution,
    "runtime_environment": ROBOVAST.runtimeEnvironment,
}


def system_info(ctx: CollectContext) -> LinkedDocument:
    doc = ctx.fragment()
    run = ctx.run
    assert run is not None
    iri = _naming(ctx).element(run.run_dir)
    for key, pred in _SYSTEM_KEYS.items():
        if key in run.system:
            doc.add(iri, pred, Literal(run.system[key]))
    return doc


def bag_metadata(ctx: CollectContext) -> LinkedDocument:
    """Middleware version and message-type counts from the bag sidecar summary."""
    doc = ctx.fragment()
    run = ctx.run
    assert run is not None
    meta = run.bag_meta
    bags = run.artifact("bag")
    if not bags or not meta:
        return doc
    naming = _naming(ctx)
    declared = meta.get("path")
    targets = [b for b in bags if declared and b.path == f"{run.run_dir}/{declared}"] or bags
    for bag in targets:
        node = doc.node(naming.element(bag.path))
        if meta.get("middleware_version"):
            node.add(ROBOVAST.middlewareVersion, Literal(str(meta["middleware_version"])))
        for msg in meta.get("messages") or []:
            node.add(ROBOVAST.messageType, Literal(f"{msg['type']} ({int(msg.get('count', 0))})"))
    return doc


def postprocess_provenance(ctx: CollectContext) -> LinkedDocument:
    """One activity per postprocessing step: used inputs, generated and derived outputs."""
    doc = ctx.fragment()
    run = ctx.run
    assert run is not None
    naming = _naming(ctx)
    for step in run.postprocessing:
        act = doc.node(naming.activity(run.run_dir, step.plugin), PROV.Activity, ROBOVAST.Postprocessing)
        act.add(ROBOVAST.plugin, Literal(step.plugin))
        for key, value in step.parameters:
            act.add(ROBOVAST.parameter, Literal(f"{key}={value}"))
        act.add(PROV.wasAssociatedWith, naming.agent(ROBOVAST_AGENT))
        act.add(PROV.wasInformedBy, naming.element(run.run_dir))
        inputs = [naming.element(p) for p in step.inputs]
        for src in inputs:
            act.add(PROV.used, src)
        for out in step.outputs:
            node = doc.node(naming.element(out))
            node.add(PROV.wasGeneratedBy, act.id)
            for src in inputs:
                node.add(PROV.wasDerivedFrom, src)
    return doc


def default_registry() -> PluginRegistry:
    return PluginRegistry(
        [
            CollectorPlugin("campaign_info", "campaign", campaign_info),
            CollectorPlugin("scenario_parameters", "configuration", scenario_parameters),
            CollectorPlugin("test_outcome", "run", test_outcome),
            CollectorPlugin("system_info", "run", system_info),
            CollectorPlugin("bag_metadata", "run", bag_metadata),
            CollectorPlugin("postprocess_provenance", "postprocess", postprocess_provenance),
        ]
    )
