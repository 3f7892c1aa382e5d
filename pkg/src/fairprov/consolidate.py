"""Campaign provenance graph construction, validation and statistics."""

from __future__ import annotations

from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .capture import (
    MANIFEST_NAME,
    CampaignManifest,
    CollectContext,
    ConfigRecord,
    InputRecord,
    ScanResult,
    parse_manifest,
    run_collectors,
    scan_campaign,
    utc_stamp,
)
from .errors import ConflictingFunctionalValue, ConsolidationConflict, MissingMandatoryEdge
from .identity import ORCID_BASE, BaseIri, DatasetNaming, validate_orcid
from .ldgraph import LinkedDocument, Literal, NodeObject, merge
from .vocab import (
    DCAT,
    DCTERMS,
    DEFAULT_TABLE,
    FUNCTIONAL_PROPERTIES,
    PROV,
    QUDT,
    RDF,
    ROBOVAST,
    SMM,
    UNITS,
    PrefixTable,
    Term,
    compact,
)

ENVIRONMENT_ROLES = ("mesh", "occupancy_grid", "world")
PERSISTENT_HOSTS = ("purl.org", "w3id.org")

_INPUT_TYPES = {
    "abstract-scenario": SMM.AbstractScenario,
    "variation": SMM.ScenarioVariation,
    "environment-model": SMM.EnvironmentModel,
    "robot-config": ROBOVAST.RobotConfiguration,
}


def _person(doc: LinkedDocument, naming: DatasetNaming, name: str, orcid: str | None) -> str:
    iri = naming.person(name, validate_orcid(orcid) if orcid else None)
    node = doc.node(iri, PROV.Person, PROV.Agent)
    if name and name != "...":
        node.add(ROBOVAST.name, Literal(name))
    return iri


def _people(doc: LinkedDocument, naming: DatasetNaming, raw: object) -> list[str]:
    """Person IRIs from a metadata value: ORCID string, name, mapping or list of those."""
    items = raw if isinstance(raw, list) else [raw]
    out = []
    for item in items:
        if isinstance(item, dict):
            out.append(_person(doc, naming, str(item.get("name", "")), item.get("orcid")))
        elif item:
            text = str(item)
            bare = text[len(ORCID_BASE):] if text.startswith(ORCID_BASE) else text
            try:
                out.append(_person(doc, naming, "", validate_orcid(bare)))
            except Exception:
                out.append(_person(doc, naming, text, None))
    return out


class _Builder:
    def __init__(self, manifest: CampaignManifest, scan: ScanResult) -> None:
        self.manifest = manifest
        self.scan = scan
        self.naming = DatasetNaming(manifest.base, dict(manifest.execution.software_agents))
        self.doc = LinkedDocument(DEFAULT_TABLE.with_base(manifest.base.value))
        self.inputs: dict[str, InputRecord] = {r.path: r for r in scan.inputs}
        self.creators: list[str] = []

    def location(self, path: str) -> str:
        iri = self.naming.location(path)
        self.doc.node(iri, PROV.Location).add(ROBOVAST.relativePath, Literal(path))
        return iri

    def file_entity(self, path: str, *types: str) -> NodeObject:
        node = self.doc.node(self.naming.element(path), PROV.Entity, *types)
        node.add(PROV.atLocation, self.location(path))
        return node

    def agents(self) -> None:
        n = self.naming
        for name in ("robovast", "floorplan-dsl"):
            node = self.doc.node(n.agent(name), PROV.SoftwareAgent, PROV.Agent)
            node.add(ROBOVAST.name, Literal(name))
        robot = self.manifest.execution.robot
        node = self.doc.node(n.agent(robot.name), PROV.Agent, ROBOVAST.Robot)
        node.add(ROBOVAST.name, Literal(robot.name))
        for prop, unit in UNITS.items():
            self.doc.node(prop, RDF.Property).add(QUDT.unit, unit)

    def dataset(self) -> None:
        meta = self.manifest.metadata
        n = self.naming
        node = self.doc.node(n.dataset, DCAT.Dataset)
        node.add(DCTERMS.title, Literal(meta.title))
        if meta.description:
            node.add(DCTERMS.description, Literal(meta.description))
        node.add(DCTERMS.license, Literal(meta.license))
        for kw in meta.keywords:
            node.add(DCAT.keyword, Literal(kw))
        for c in meta.creators:
            iri = _person(self.doc, n, c.name, c.orcid)
            self.creators.append(iri)
            node.add(DCTERMS.creator, iri)
        for name in ("inputs", "environments", "configs"):
            coll = n.collection(name)
            self.doc.node(coll, PROV.Collection, PROV.Entity)
            node.add(PROV.hadMember, coll)
        for spec in self.manifest.publication:
            dist = self.doc.node(n.distribution(spec.name), DCAT.Distribution)
            dist.add(DCTERMS.title, Literal(spec.name))
            dist.add(DCAT.mediaType, Literal("application/zip"))
            for glob in spec.include_filter:
                dist.add(ROBOVAST.parameter, Literal(f"include_filter={glob}"))
            node.add(DCAT.distribution, dist.id)

    def input_files(self) -> None:
        n = self.naming
        inputs_coll = self.doc.node(n.collection("inputs"))
        manifest_node = self.file_entity("campaign.vast.yaml")
        inputs_coll.add(PROV.hadMember, manifest_node.id)
        for c in self.creators:
            manifest_node.add(PROV.wasAttributedTo, c)
        for rec in self.inputs.values():
            node = self.file_entity(rec.path, _INPUT_TYPES[rec.kind])
            inputs_coll.add(PROV.hadMember, node.id)
            self._describe_input(node, rec)
        ex = self.manifest.execution.inputs
        for required, what in ((ex.abstract_scenario, "abstract scenario"), (ex.variation_file, "variation file")):
            if not required or required not in self.inputs:
                raise MissingMandatoryEdge(f"campaign declares no usable {what}")
        variation = self.doc.node(n.element(ex.variation_file))
        for path in self.inputs:
            if path != ex.variation_file:
                variation.add(DCTERMS.references, n.element(path))

    def _describe_input(self, node: NodeObject, rec: InputRecord) -> None:
        meta = rec.metadata
        attributed = _people(self.doc, self.naming, meta.get("attribution")) if meta.get("attribution") else []
        for p in attributed or self.creators:
            node.add(PROV.wasAttributedTo, p)
        if meta.get("authors"):
            for p in _people(self.doc, self.naming, meta["authors"]):
                node.add(DCTERMS.creator, p)
        if meta.get("version") is not None:
            node.add(DCTERMS.hasVersion, Literal(str(meta["version"])))
        for key, pred in (("created", DCTERMS.created), ("modified", DCTERMS.modified)):
            if meta.get(key):
                node.add(pred, Literal(utc_stamp(meta[key]), "dateTime"))
        if meta.get("size") is not None:
            node.add(DCAT.byteSize, Literal.of(int(meta["size"])))
        if meta.get("license"):
            node.add(DCTERMS.license, Literal(str(meta["license"])))
        if meta.get("description"):
            node.add(DCTERMS.description, Literal(str(meta["description"])))
        if meta.get("map_location"):
            node.add(ROBOVAST.mapLocation, Literal(str(meta["map_location"])))

    def scenario_generation(self) -> None:
        n = self.naming
        ex = self.manifest.execution.inputs
        act = self.doc.node(n.scenario_generation, PROV.Activity, ROBOVAST.ScenarioGeneration)
        act.add(PROV.used, n.element(ex.abstract_scenario))
        act.add(PROV.used, n.element(ex.variation_file))
        act.add(PROV.wasAssociatedWith, n.agent("robovast"))

    def environments(self) -> dict[str, list[str]]:
        """Environment generation activities and artifacts; returns artifact ids per env dir."""
        n = self.naming
        coll = self.doc.node(n.collection("environments"))
        produced: dict[str, list[str]] = {}
        for env in self.scan.environments:
            if env.map_ref not in self.inputs:
                raise MissingMandatoryEdge(f"{env.env_dir}: floorplan {env.map_ref} is not a declared input")
            floorplan = n.element(env.map_ref)
            ids = []
            for role in ENVIRONMENT_ROLES:
                art = env.artifacts.get(role)
                if art is None:
                    raise MissingMandatoryEdge(f"{env.env_dir}: no {role} artifact")
                act = self.doc.node(n.activity(env.env_dir, f"{role}_generation"), PROV.Activity, ROBOVAST.EnvironmentGeneration)
                act.add(PROV.used, floorplan)
                act.add(PROV.wasInformedBy, n.scenario_generation)
                act.add(PROV.wasAssociatedWith, n.agent(env.tool))
                self.doc.node(n.agent(env.tool), PROV.SoftwareAgent, PROV.Agent)
                node = self.file_entity(art.path, ROBOVAST.Artifact)
                node.add(ROBOVAST.artifactKind, Literal(role))
                node.add(DCAT.byteSize, Literal.of(art.size))
                node.add(DCTERMS.created, Literal(env.generated_at, "dateTime"))
                node.add(PROV.wasGeneratedBy, act.id)
                node.add(PROV.wasDerivedFrom, floorplan)
                coll.add(PROV.hadMember, node.id)
                ids.append(node.id)
            produced[env.env_dir] = ids
            produced.setdefault(env.map_ref, ids)
        return produced

    def configuration(self, cfg: ConfigRecord, env_artifacts: dict[str, list[str]]) -> None:
        n = self.naming
        ex = self.manifest.execution
        scenario = self.doc.node(n.element(cfg.config_dir), SMM.ConcreteScenario, PROV.Entity)
        scenario.add(PROV.atLocation, self.location(f"{cfg.config_dir}/scenario.config"))
        scenario.add(PROV.wasGeneratedBy, n.scenario_generation)
        scenario.add(DCTERMS.references, n.element(ex.inputs.variation_file))
        scenario.add(DCTERMS.references, n.element(ex.inputs.abstract_scenario))
        if cfg.map_ref not in self.inputs:
            raise MissingMandatoryEdge(f"{cfg.config_dir}: map {cfg.map_ref} is not a declared input")
        scenario.add(DCTERMS.references, n.element(cfg.map_ref))
        arts = env_artifacts.get(cfg.environment or "") or env_artifacts.get(cfg.map_ref)
        if not arts:
            raise MissingMandatoryEdge(f"{cfg.config_dir}: no generated environment for {cfg.map_ref}")
        for a in arts:
            scenario.add(DCTERMS.references, a)
        self.doc.node(n.collection("configs")).add(PROV.hadMember, scenario.id)

        if not cfg.robot_config:
            raise MissingMandatoryEdge(f"{cfg.config_dir}: scenario.config names no robot_config")
        robot = self.doc.node(n.robot_configuration(cfg.config_dir), PROV.Entity, PROV.Collection, ROBOVAST.RobotConfiguration)
        params = self.file_entity(cfg.robot_config, ROBOVAST.RobotConfiguration)
        robot.add(PROV.hadMember, params.id)
        for extra in (ex.robot.launch, ex.robot.model):
            if extra and extra in self.inputs:
                robot.add(PROV.hadMember, n.element(extra))
        meta = cfg.robot_meta
        original = meta.get("derived_from") or ex.robot.parameters
        if not original or original not in self.inputs:
            raise MissingMandatoryEdge(f"{cfg.robot_config}: no original robot configuration to derive from")
        params.add(PROV.wasDerivedFrom, n.element(original))
        for node in (robot, params):
            if meta.get("version") is not None:
                node.add(DCTERMS.hasVersion, Literal(str(meta["version"])))
            if meta.get("modified"):
                node.add(DCTERMS.modified, Literal(utc_stamp(meta["modified"]), "dateTime"))

        load = self.doc.node(n.load_config(cfg.config_dir), PROV.Activity, ROBOVAST.LoadConfig)
        load.add(PROV.used, robot.id)
        load.add(PROV.wasAssociatedWith, n.agent(ex.robot.name))

    def runs(self) -> None:
        n = self.naming
        configs = {c.config_id: c for c in self.scan.configs}
        robot_agent = n.agent(self.manifest.execution.robot.name)
        for run in self.scan.runs:
            cfg = configs.get(run.config_id)
            if cfg is None:
                raise MissingMandatoryEdge(f"{run.run_dir}: configuration {run.config_id} was not scanned")
            if len(run.artifact("test-report")) != 1:
                raise MissingMandatoryEdge(f"{run.run_dir}: expected exactly one test report")
            act = self.doc.node(n.element(run.run_dir), ROBOVAST.TestExecution, PROV.Activity)
            act.add(PROV.used, n.element(cfg.config_dir))
            act.add(PROV.used, n.robot_configuration(cfg.config_dir))
            act.add(PROV.wasAssociatedWith, robot_agent)
            act.add(PROV.wasInformedBy, n.load_config(cfg.config_dir))
            derived = {p for step in run.postprocessing for p in step.outputs}
            for art in run.artifacts:
                node = self.file_entity(art.path, ROBOVAST.Artifact)
                node.add(ROBOVAST.artifactKind, Literal(art.kind))
                node.add(DCAT.byteSize, Literal.of(art.size))
                if art.path not in derived:
                    node.add(PROV.wasGeneratedBy, act.id)


def build_graph(
    manifest: CampaignManifest,
    scan: ScanResult,
    fragments: Iterable[LinkedDocument] | None = None,
) -> LinkedDocument:
    """Instantiate the campaign metamodel from manifest, scan and collector fragments."""
    b = _Builder(manifest, scan)
    b.agents()
    b.dataset()
    b.input_files()
    b.scenario_generation()
    env_artifacts = b.environments()
    for cfg in scan.configs:
        b.configuration(cfg, env_artifacts)
    b.runs()
    if fragments is None:
        from .collectors import default_registry

        result = run_collectors(default_registry(), CollectContext(manifest, scan))
        if result.failures:
            raise ConsolidationConflict(f"{len(result.failures)} collector failures, first: {result.failures[0]}")
        fragments = result.documents()
    try:
        return merge([b.doc, *fragments])
    except ConflictingFunctionalValue as exc:
        raise ConsolidationConflict(str(exc)) from exc


def consolidate_tree(root: str | Path, *, workers: int = 1) -> tuple[LinkedDocument, ScanResult]:
    """Parse ``<root>/campaign.vast.yaml``, scan the tree and build its graph."""
    root = Path(root)
    manifest = parse_manifest((root / MANIFEST_NAME).read_bytes())
    scan = scan_campaign(root, manifest, workers=workers)
    return build_graph(manifest, scan), scan


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class EdgeRule:
    source: str
    predicate: str
    target: str | None  # class IRI, or None for a literal value
    multiplicity: str  # "1", "1..*", "0..1", "0..*"
    category: str = "provenance"

    @property
    def name(self) -> str:
        src = compact(self.source)
        tgt = compact(self.target) if self.target else "literal"
        return f"{src} {compact(self.predicate)} {tgt} [{self.multiplicity}]"

    def accepts(self, count: int) -> bool:
        lo, _, hi = self.multiplicity.partition("..")
        if count < int(lo):
            return False
        if not hi:
            return count == int(lo)
        return hi == "*" or count <= int(hi)


EDGE_RULES: tuple[EdgeRule, ...] = (
    EdgeRule(ROBOVAST.TestExecution, PROV.used, SMM.ConcreteScenario, "1"),
    EdgeRule(ROBOVAST.TestExecution, PROV.used, ROBOVAST.RobotConfiguration, "1"),
    EdgeRule(ROBOVAST.TestExecution, PROV.wasAssociatedWith, ROBOVAST.Robot, "1"),
    EdgeRule(ROBOVAST.TestExecution, PROV.wasInformedBy, ROBOVAST.LoadConfig, "1"),
    EdgeRule(ROBOVAST.TestExecution, PROV.startedAtTime, None, "1"),
    EdgeRule(ROBOVAST.TestExecution, PROV.endedAtTime, None, "1"),
    EdgeRule(ROBOVAST.TestExecution, ROBOVAST.success, None, "1"),
    EdgeRule(ROBOVAST.LoadConfig, PROV.used, ROBOVAST.RobotConfiguration, "1"),
    EdgeRule(ROBOVAST.LoadConfig, PROV.wasAssociatedWith, ROBOVAST.Robot, "1"),
    EdgeRule(SMM.ConcreteScenario, PROV.wasGeneratedBy, ROBOVAST.ScenarioGeneration, "1"),
    EdgeRule(SMM.ConcreteScenario, DCTERMS.references, SMM.EnvironmentModel, "1..*"),
    EdgeRule(SMM.ConcreteScenario, ROBOVAST.n_obstacles, None, "1", "metadata"),
    EdgeRule(ROBOVAST.ScenarioGeneration, PROV.used, SMM.AbstractScenario, "1..*"),
    EdgeRule(ROBOVAST.ScenarioGeneration, PROV.used, SMM.ScenarioVariation, "1..*"),
    EdgeRule(ROBOVAST.EnvironmentGeneration, PROV.used, SMM.EnvironmentModel, "1"),
    EdgeRule(ROBOVAST.EnvironmentGeneration, PROV.wasInformedBy, ROBOVAST.ScenarioGeneration, "1"),
    EdgeRule(ROBOVAST.Artifact, PROV.wasGeneratedBy, PROV.Activity, "1"),
    EdgeRule(ROBOVAST.Artifact, PROV.atLocation, PROV.Location, "1"),
    EdgeRule(ROBOVAST.Postprocessing, PROV.used, PROV.Entity, "1..*"),
    EdgeRule(ROBOVAST.Postprocessing, ROBOVAST.plugin, None, "1", "metadata"),
    EdgeRule(SMM.ScenarioVariation, DCTERMS.references, SMM.EnvironmentModel, "1..*"),
    EdgeRule(SMM.ScenarioVariation, PROV.wasAttributedTo, PROV.Person, "1..*"),
    EdgeRule(SMM.EnvironmentModel, PROV.wasAttributedTo, PROV.Person, "1..*"),
    EdgeRule(DCAT.Dataset, DCTERMS.title, None, "1", "metadata"),
    EdgeRule(DCAT.Dataset, DCTERMS.identifier, None, "0..1", "identity"),
    EdgeRule(DCAT.Dataset, DCAT.distribution, DCAT.Distribution, "0..*", "metadata"),
)

# the used/wasGeneratedBy type discipline: predicate -> class its subject must carry
_SUBJECT_TYPES = {
    PROV.used: PROV.Activity,
    PROV.wasGeneratedBy: PROV.Entity,
    PROV.wasDerivedFrom: PROV.Entity,
    PROV.wasInformedBy: PROV.Activity,
}
_CHAIN_EXEMPT = (PROV.Collection, DCAT.Dataset, DCAT.Distribution, PROV.Location)


@dataclass(frozen=True)
class Violation:
    rule: str
    node: str
    message: str
    category: str = "provenance"


@dataclass
class GraphReport:
    node_counts: dict[str, int] = field(default_factory=dict)
    triple_count: int = 0
    node_total: int = 0
    violations: list[Violation] = field(default_factory=list)

    def by_category(self, category: str) -> list[Violation]:
        return [v for v in self.violations if v.category == category]

    def as_dict(self) -> dict:
        return {
            "nodes": self.node_total,
            "triples": self.triple_count,
            "node_counts": dict(sorted(self.node_counts.items())),
            "violations": [
                {"rule": v.rule, "node": v.node, "message": v.message, "category": v.category}
                for v in self.violations
            ],
        }


def stats(doc: LinkedDocument) -> GraphReport:
    counts: Counter[str] = Counter()
    for node in doc.nodes.values():
        for t in node.types:
            counts[str(compact(t, doc.context))] += 1
    return GraphReport(
        node_counts=dict(sorted(counts.items())),
        triple_count=doc.triple_count(),
        node_total=len(doc.nodes),
    )


def root_inputs(doc: LinkedDocument) -> set[str]:
    """Entities exempt from generation chains: members of the dataset's inputs collection."""
    roots: set[str] = set()
    if not doc.base:
        return roots
    dataset = doc.nodes.get(doc.base)
    if dataset is None:
        return roots
    inputs = BaseIri(doc.base).value + "/inputs"
    coll = doc.nodes.get(inputs)
    if coll is not None:
        roots.update(v for v in coll.get(PROV.hadMember) if isinstance(v, str))
    return roots


def grounded_entities(doc: LinkedDocument, roots: set[str]) -> set[str]:
    """Entities reachable from a root input through derivation or generation by an activity that used a grounded entity."""
    derived_from: dict[str, list[str]] = defaultdict(list)
    generated_by: dict[str, list[str]] = defaultdict(list)
    users: dict[str, list[str]] = defaultdict(list)
    informs: dict[str, list[str]] = defaultdict(list)
    for node in doc.nodes.values():
        for v in node.get(PROV.wasDerivedFrom):
            derived_from[v].append(node.id)
        for v in node.get(PROV.wasGeneratedBy):
            generated_by[v].append(node.id)
        for v in node.get(PROV.used):
            users[v].append(node.id)
        for v in node.get(PROV.wasInformedBy):
            informs[v].append(node.id)
    entities = set(roots)
    activities: set[str] = set()
    queue = deque(("e", r) for r in roots)
    while queue:
        kind, iri = queue.popleft()
        if kind == "e":
            nxt = [("e", d) for d in derived_from.get(iri, ())]
            nxt += [("a", a) for a in users.get(iri, ())]
        else:
            nxt = [("e", e) for e in generated_by.get(iri, ())]
            nxt += [("a", a) for a in informs.get(iri, ())]
        for item in nxt:
            seen = entities if item[0] == "e" else activities
            if item[1] not in seen:
                seen.add(item[1])
                queue.append(item)
    return entities


def is_persistent_host(iri: str) -> bool:
    from urllib.parse import urlsplit

    parts = urlsplit(iri)
    return parts.scheme == "https" and parts.hostname in PERSISTENT_HOSTS


def resident(iri: str, node: NodeObject | None, base: str | None, table: PrefixTable) -> bool:
    if base and (iri == base or iri.startswith(base.rstrip("/") + "/")):
        return True
    if iri.startswith(ORCID_BASE):
        return True
    if any(iri.startswith(ns) for ns in table.entries.values()):
        return True
    if node is not None and PROV.SoftwareAgent in node.types and is_persistent_host(iri):
        return True
    return False


def validate_graph(doc: LinkedDocument, rules: Sequence[EdgeRule] = EDGE_RULES) -> GraphReport:
    """Check edge multiplicities, provenance chains, functional properties and id residency."""
    report = stats(doc)
    out = report.violations
    nodes = doc.nodes

    for rule in rules:
        for node in nodes.values():
            if rule.source not in node.types:
                continue
            values = node.get(rule.predicate)
            if rule.target is None:
                count = sum(1 for v in values if isinstance(v, Literal))
            else:
                count = sum(
                    1 for v in values if isinstance(v, str) and v in nodes and rule.target in nodes[v].types
                )
            if not rule.accepts(count):
                out.append(Violation(rule.name, node.id, f"found {count} matching values", rule.category))

    for node in nodes.values():
        for pred, required in _SUBJECT_TYPES.items():
            if node.get(pred) and required not in node.types:
                out.append(
                    Violation("type-discipline", node.id, f"subject of {compact(pred)} is not a {compact(required)}")
                )
        for pred in FUNCTIONAL_PROPERTIES:
            if len(node.get(pred)) > 1:
                out.append(
                    Violation("functional-property", node.id, f"{compact(pred)} has {len(node.get(pred))} values", "identity")
                )

    holders: dict[Literal, list[str]] = defaultdict(list)
    for node in nodes.values():
        for v in node.get(DCTERMS.identifier):
            holders[v].append(node.id)
    for value, ids in holders.items():
        if len(ids) > 1:
            for iri in ids:
                out.append(Violation("identifier-unique", iri, f"identifier {value} shared by {len(ids)} nodes", "identity"))

    for subj, pred, obj in doc.dangling_references():
        out.append(Violation("dangling-reference", obj, f"referenced by {subj} via {compact(pred)} but not in the graph"))

    # every configured robot setup that a test execution used must have been loaded
    loaded = {v for n in nodes.values() if ROBOVAST.LoadConfig in n.types for v in n.get(PROV.used)}
    for node in nodes.values():
        if ROBOVAST.TestExecution in node.types:
            for v in node.get(PROV.used):
                target = nodes.get(v) if isinstance(v, str) else None
                if target is not None and ROBOVAST.RobotConfiguration in target.types and v not in loaded:
                    out.append(Violation("load-config", v, f"used by {node.id} but no load_config activity uses it"))

    roots = root_inputs(doc)
    grounded = grounded_entities(doc, roots)
    for node in nodes.values():
        if PROV.Entity not in node.types or node.id in roots:
            continue
        if any(t in node.types for t in _CHAIN_EXEMPT):
            continue
        if node.id not in grounded:
            out.append(Violation("provenance-chain", node.id, "no generation/derivation chain to a root input"))

    for node in nodes.values():
        if not resident(node.id, node, doc.base, doc.context):
            out.append(Violation("residency", node.id, "id is outside the dataset base and known external schemes", "identity"))

    out.sort(key=lambda v: (v.category, v.rule, v.node))
    # the same missing node can trip one rule from several referrers
    report.violations = list(dict.fromkeys(out))
    return report
