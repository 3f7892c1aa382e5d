from collections import Counter

import pytest

from fairprov.consolidate import build_graph, consolidate_tree, stats, validate_graph
from fairprov.capture import CollectContext, parse_manifest, run_collectors, scan_campaign
from fairprov.collectors import default_registry
from fairprov.ldgraph import LinkedDocument, Literal, serialize
from fairprov.vocab import DCTERMS, PROV, ROBOVAST, SMM

from oracles import failure_tally


def _rel(doc, suffix):
    return doc.base + "/" + suffix


def test_demo_counts(demo_graph_frozen):
    report = validate_graph(demo_graph_frozen)
    assert (report.node_total, report.triple_count) == (108, 588)
    assert report.violations == []


def test_runs_are_wired(demo_graph_frozen):
    doc = demo_graph_frozen
    runs = doc.of_type(ROBOVAST.TestExecution)
    assert len(runs) == 4
    for run in runs:
        scen = [v for v in run.get(PROV.used) if SMM.ConcreteScenario in doc.nodes[v].types]
        assert len(scen) == 1 and run.id.startswith(scen[0] + "/runs/")
        assert run.get(PROV.wasAssociatedWith) == [_rel(doc, "agents/turtlebot4")]
        loader = run.first(PROV.wasInformedBy)
        assert loader == scen[0] + "/load_config"


def test_one_load_config_per_configuration(demo_graph_frozen):
    doc = demo_graph_frozen
    loaders = doc.of_type(ROBOVAST.LoadConfig)
    assert sorted(n.id for n in loaders) == [_rel(doc, "configs/c_0000/load_config"), _rel(doc, "configs/c_0001/load_config")]
    for n in loaders:
        assert n.get(PROV.used) == [n.id.rsplit("/", 1)[0] + "/robot"]


def test_outcomes_match_reports(demo_tree, demo_graph_frozen):
    doc = demo_graph_frozen
    seen = Counter()
    for run in doc.of_type(ROBOVAST.TestExecution):
        cfg = run.id.split("/configs/")[1].split("/")[0]
        if run.first(ROBOVAST.success) == Literal.of(False):
            seen[cfg] += 1
    assert {k: f for k, (f, _) in failure_tally(demo_tree).items() if f} == dict(seen)


def test_build_graph_is_deterministic(demo_tree, demo_graph_frozen):
    again, _ = consolidate_tree(demo_tree, workers=3)
    assert serialize(again) == serialize(demo_graph_frozen)


def test_build_graph_with_explicit_fragments(demo_tree, demo_graph_frozen):
    m = parse_manifest((demo_tree / "campaign.vast.yaml").read_bytes())
    scan = scan_campaign(demo_tree, m)
    frags = run_collectors(default_registry(), CollectContext(m, scan)).documents()
    assert serialize(build_graph(m, scan, reversed(frags))) == serialize(demo_graph_frozen)


def test_stats_on_empty_document():
    report = stats(LinkedDocument())
    assert (report.node_total, report.triple_count, report.node_counts) == (0, 0, {})
    assert validate_graph(LinkedDocument()).violations == []


def _violations(doc):
    return {(v.rule, v.node) for v in validate_graph(doc).violations}


def test_missing_generation_names_artifact(demo_graph):
    csv = _rel(demo_graph, "configs/c_0000/runs/run_000/postprocess/poses.csv")
    demo_graph.nodes[csv].remove(PROV.wasGeneratedBy)
    found = _violations(demo_graph)
    assert ("robovast:Artifact prov:wasGeneratedBy prov:Activity [1]", csv) in found
    assert all(node == csv for _, node in found)


def test_missing_association_names_run(demo_graph):
    run = _rel(demo_graph, "configs/c_0001/runs/run_001")
    demo_graph.nodes[run].remove(PROV.wasAssociatedWith)
    assert _violations(demo_graph) == {("robovast:TestExecution prov:wasAssociatedWith robovast:Robot [1]", run)}


def test_foreign_id_is_not_resident(demo_graph):
    csv = _rel(demo_graph, "configs/c_0000/runs/run_000/postprocess/poses.csv")
    demo_graph.rename_node(csv, "https://example.org/x.csv")
    assert ("residency", "https://example.org/x.csv") in _violations(demo_graph)


def test_two_dataset_identifiers(demo_graph):
    ds = demo_graph.nodes[demo_graph.base]
    ds.add(DCTERMS.identifier, Literal("a"))
    ds.add(DCTERMS.identifier, Literal("b"))
    found = _violations(demo_graph)
    assert ("functional-property", ds.id) in found
    assert ("dcat:Dataset dcterms:identifier literal [0..1]", ds.id) in found


def test_missing_load_config(demo_graph):
    lc = _rel(demo_graph, "configs/c_0000/load_config")
    demo_graph.remove_node(lc)
    found = _violations(demo_graph)
    rules = {r for r, _ in found}
    assert ("dangling-reference", lc) in found
    assert ("load-config", _rel(demo_graph, "configs/c_0000/robot")) in found
    assert "robovast:TestExecution prov:wasInformedBy robovast:LoadConfig [1]" in rules


def test_orphan_artifact(demo_graph):
    orphan = _rel(demo_graph, "configs/c_0000/runs/run_000/postprocess/extra.csv")
    demo_graph.node(orphan, PROV.Entity, ROBOVAST.Artifact)
    found = _violations(demo_graph)
    assert ("provenance-chain", orphan) in found
    assert all(node == orphan for _, node in found)
    assert len(found) >= 3


def test_shared_identifier_flags_every_holder(demo_graph):
    a = _rel(demo_graph, "inputs/maps/map_00.fpm")
    b = _rel(demo_graph, "inputs/scenarios/nav_to_pose.osc")
    for iri in (a, b):
        demo_graph.nodes[iri].set(DCTERMS.identifier, Literal("same"))
    found = _violations(demo_graph)
    assert {("identifier-unique", a), ("identifier-unique", b)} <= found


def test_type_discipline(demo_graph):
    loc = _rel(demo_graph, "files/campaign.vast.yaml")
    demo_graph.nodes[loc].add(PROV.used, _rel(demo_graph, "campaign.vast.yaml"))
    assert ("type-discipline", loc) in _violations(demo_graph)


def test_default_graph_is_clean(default_graph):
    report = validate_graph(default_graph)
    assert report.violations == []
    assert report.node_counts["robovast:TestExecution"] == 2000
    assert report.node_counts["smm:ConcreteScenario"] == 200
