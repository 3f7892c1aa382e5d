import json
import shutil

import pytest

from fairprov import faircheck
from fairprov.faircheck import MANUAL, PRINCIPLES, PrincipleCheck, check, render_report
from fairprov.ldgraph import Literal, serialize
from fairprov.publish import attach_doi
from fairprov.vocab import DCAT, DCTERMS, PROV

DOI = "10.5281/zenodo.18702398"

EXPECTED = {
    "F1": "pass", "F2": "pass", "F3": "pass", "F4": "manual",
    "A1": "pass", "A1.1": "manual", "A1.2": "manual", "A2": "manual",
    "I1": "pass", "I2": "partial", "I3": "partial",
    "R1": "partial", "R1.1": "pass", "R1.2": "pass", "R1.3": "manual",
}


@pytest.fixture
def published(demo_graph):
    return attach_doi(demo_graph, DOI)


def _rel(doc, suffix):
    return doc.base + "/" + suffix


def _flips(before, after):
    return {k for k in PRINCIPLES if before.statuses[k] != after.statuses[k]}


def test_demo_pattern(published, demo_tree):
    report = check(published, demo_tree)
    assert report.statuses == EXPECTED
    assert report.summary == {"pass": 7, "partial": 3, "fail": 0, "manual": 5}
    assert not report.failed


def test_pre_deposit_only_f3_fails(demo_graph, demo_tree):
    report = check(demo_graph, demo_tree)
    assert {k for k, v in report.statuses.items() if v == "fail"} == {"F3"}
    assert report.summary == {"pass": 6, "partial": 3, "fail": 1, "manual": 5}


def test_manual_set_and_r13_message(published):
    report = check(published)
    assert {c.id for c in report.checks if c.status == "manual"} == set(MANUAL)
    assert "lack of community standards and controlled vocabularies" in report["R1.3"].message


def test_partial_evidence_names_inputs(published):
    r1 = check(published)["R1"]
    text = "\n".join(r1.evidence)
    assert "campaign.vast.yaml lacks dcterms:hasVersion, dcterms:modified" in text
    assert "nav_to_pose.osc lacks dcterms:modified" in text


def test_check_accepts_serialized_bytes(published, demo_tree):
    assert check(serialize(published), demo_tree).statuses == check(published, demo_tree).statuses


def test_determinism(published, demo_tree):
    a = render_report(check(published, demo_tree), "json")
    b = render_report(check(published.copy(), demo_tree), "json")
    assert a == b
    data = json.loads(a)
    assert [c["id"] for c in data["checks"]] == list(PRINCIPLES)


def _mutate_license(doc):
    doc.nodes[doc.base].remove(DCTERMS.license)


def _mutate_keywords(doc):
    doc.nodes[doc.base].remove(DCAT.keyword)


def _mutate_identifier(doc):
    doc.nodes[doc.base].remove(DCTERMS.identifier)


def _mutate_generation(doc):
    doc.nodes[_rel(doc, "configs/c_0000/runs/run_000/postprocess/poses.csv")].remove(PROV.wasGeneratedBy)


def _mutate_foreign_location(doc):
    doc.rename_node(_rel(doc, "files/campaign.vast.yaml"), "https://example.org/x")


def _mutate_plain_http(doc):
    old = _rel(doc, "distributions/results")
    doc.rename_node(old, old.replace("https://", "http://"))


@pytest.mark.parametrize(
    "mutate, principle, status",
    [
        (_mutate_license, "R1.1", "fail"),
        (_mutate_keywords, "F2", "partial"),
        (_mutate_identifier, "F3", "fail"),
        (_mutate_generation, "R1.2", "fail"),
        (_mutate_foreign_location, "F1", "fail"),
    ],
)
def test_mutation_flips_one_principle(published, demo_tree, mutate, principle, status):
    before = check(published, demo_tree)
    doc = published.copy()
    mutate(doc)
    after = check(doc, demo_tree)
    assert _flips(before, after) == {principle}
    assert after[principle].status == status


def test_plain_http_distribution_fails_a1(published, demo_tree):
    doc = published.copy()
    _mutate_plain_http(doc)
    assert check(doc, demo_tree)["A1"].status == "fail"


def test_missing_file_fails_a1(published, demo_tree, tmp_path):
    root = tmp_path / "ds"
    shutil.copytree(demo_tree, root)
    (root / "configs/c_0001/runs/run_001/postprocess/poses.csv").unlink()
    after = check(published, root)
    assert _flips(check(published, demo_tree), after) == {"A1"}
    assert any("poses.csv" in e for e in after["A1"].evidence)


def test_shared_identifier_fails_f1(published):
    doc = published.copy()
    ident = doc.nodes[doc.base].first(DCTERMS.identifier)
    doc.nodes[_rel(doc, "inputs/maps/map_00.fpm")].add(DCTERMS.identifier, ident)
    assert check(doc)["F1"].status == "fail"


def test_title_only_floor(published):
    doc = published.copy()
    ds = doc.nodes[doc.base]
    for p in (DCTERMS.description, DCTERMS.creator, DCAT.keyword, DCTERMS.license):
        ds.remove(p)
    report = check(doc)
    assert report["F2"].status == "partial"
    assert report["R1"].status == "partial"
    ds.remove(DCTERMS.title)
    report = check(doc)
    assert report["F2"].status == "fail" and report["R1"].status == "fail"


def _qualify_everything(doc):
    for node in list(doc.nodes.values()):
        if PROV.Entity in node.types:
            if not node.get(DCTERMS.hasVersion):
                node.add(DCTERMS.hasVersion, Literal("1.0"))
            if not node.get(DCTERMS.modified):
                node.add(DCTERMS.modified, Literal("2025-01-01T00:00:00Z", "dateTime"))


def test_qualifying_references_reaches_pass(published, demo_tree):
    doc = published.copy()
    _qualify_everything(doc)
    report = check(doc, demo_tree)
    assert report["I3"].status == "pass"
    assert report["R1"].status == "pass"


_RANK = {"fail": 0, "partial": 1, "pass": 2, "manual": 3}


def test_adding_metadata_never_lowers_a_status(published, demo_tree):
    before = check(published, demo_tree)
    doc = published.copy()
    _qualify_everything(doc)
    after = check(doc, demo_tree)
    for pid in PRINCIPLES:
        assert _RANK[after[pid].status] >= _RANK[before[pid].status], pid


def test_principle_check_invariants():
    with pytest.raises(ValueError):
        PrincipleCheck("F4", "pass", (), "x")
    with pytest.raises(ValueError):
        PrincipleCheck("F1", "manual", (), "x")
    with pytest.raises(ValueError):
        PrincipleCheck("F1", "great", (), "x")


def test_text_rendering(published):
    text = render_report(check(published), "text").decode()
    lines = text.splitlines()
    assert lines[0].startswith("GREEN  F1")
    assert lines[-1] == "pass 7  partial 3  fail 0  manual 5"
    colored = render_report(check(published), "text", color=True).decode()
    assert "\x1b[32m" in colored and "\x1b[0m" in colored
    with pytest.raises(ValueError):
        render_report(check(published), "xml")


@pytest.mark.parametrize(
    "predicate",
    [DCTERMS.title, DCTERMS.description, DCTERMS.creator, DCAT.keyword, DCTERMS.license, DCTERMS.identifier],
)
def test_removing_metadata_never_improves(published, demo_tree, predicate):
    before = check(published, demo_tree)
    doc = published.copy()
    doc.nodes[doc.base].remove(predicate)
    after = check(doc, demo_tree)
    for pid in PRINCIPLES:
        assert _RANK[after[pid].status] <= _RANK[before[pid].status], pid


def test_file_scheme_id_fails_f1(published):
    doc = published.copy()
    doc.rename_node(_rel(doc, "configs/c_0000/runs/run_000/postprocess/poses.csv"), "file:///tmp/x")
    f1 = check(doc)["F1"]
    assert f1.status == "fail"
    assert "file:///tmp/x" in f1.evidence


def test_report_has_ten_machine_checked_principles(published, demo_tree):
    doc = published.copy()
    _qualify_everything(doc)
    report = check(doc, demo_tree)
    machine = [c for c in report.checks if c.status != "manual"]
    assert len(machine) == 10 and len(report.checks) - len(machine) == 5
