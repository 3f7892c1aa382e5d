import pytest

from fairprov.errors import InvalidIri, UnknownPrefix, UnknownProperty
from fairprov.vocab import (
    BUILTIN_PREFIXES,
    CLASSES,
    PROPERTIES,
    UNITS,
    ObjectKind,
    PrefixTable,
    Term,
    check_iri,
    compact,
    expand,
    object_kind,
)


@pytest.mark.parametrize(
    "curie, iri",
    [
        ("prov:used", "http://www.w3.org/ns/prov#used"),
        ("dcterms:title", "http://purl.org/dc/terms/title"),
        ("robovast:success", "https://purl.org/robovast/metamodels#success"),
        ("smm:ConcreteScenario", "https://purl.org/robovast/metamodels/smm#ConcreteScenario"),
    ],
)
def test_expand_builtin(curie, iri):
    assert expand(curie) == iri


def test_expand_unknown_prefix():
    with pytest.raises(UnknownPrefix):
        expand("xyz:foo")


@pytest.mark.parametrize(
    "iri, curie",
    [
        ("http://www.w3.org/ns/prov#Entity", "prov:Entity"),
        ("http://purl.org/dc/terms/modified", "dcterms:modified"),
    ],
)
def test_compact(iri, curie):
    assert str(compact(iri)) == curie


def test_compact_unknown_unchanged():
    assert compact("https://example.org/unknown#x") == "https://example.org/unknown#x"


def test_compact_prefers_longest_namespace():
    # smm is nested under the robovast path and must win
    assert compact("https://purl.org/robovast/metamodels/smm#X") == Term("smm", "X")


def test_catalog_round_trip():
    for term in list(CLASSES) + list(PROPERTIES):
        assert compact(expand(term)) == term


@pytest.mark.parametrize(
    "prop, kind",
    [
        ("robovast:success", ObjectKind.BOOLEAN),
        ("prov:used", ObjectKind.NODE),
        ("dcterms:modified", ObjectKind.DATETIME),
        ("robovast:n_obstacles", ObjectKind.INTEGER),
        ("robovast:robotRadius", ObjectKind.DECIMAL),
    ],
)
def test_object_kind(prop, kind):
    assert object_kind(prop) == kind


def test_object_kind_custom_passthrough(caplog):
    assert object_kind("robovast:brandNew") is None
    assert "uncatalogued" in caplog.text


def test_object_kind_unknown_standard_term():
    with pytest.raises(UnknownProperty):
        object_kind("prov:notAThing")


def test_required_catalog_members():
    required = """prov:Entity prov:Activity prov:Agent prov:Person prov:SoftwareAgent dcat:Dataset
    dcat:Distribution smm:AbstractScenario smm:ConcreteScenario smm:EnvironmentModel
    smm:ScenarioVariation robovast:TestExecution robovast:Campaign""".split()
    for c in required:
        assert Term.parse(c) in CLASSES
    props = """prov:used prov:wasGeneratedBy prov:wasDerivedFrom prov:wasAttributedTo prov:wasAssociatedWith
    prov:wasInformedBy prov:hadMember prov:atLocation prov:startedAtTime prov:endedAtTime dcat:distribution
    dcat:keyword dcterms:title dcterms:description dcterms:creator dcterms:license dcterms:identifier
    dcterms:issued dcterms:modified dcterms:hasVersion dcterms:references robovast:success
    robovast:n_obstacles robovast:n_runs robovast:robotRadius robovast:relativePath robovast:plugin
    robovast:parameter qudt:unit""".split()
    for p in props:
        assert Term.parse(p) in PROPERTIES
    assert set(UNITS.values()) == {expand("unit:M"), expand("unit:SEC")}


def test_prefix_table_keeps_builtins():
    table = PrefixTable({"ex": "https://example.org/"})
    for prefix in ("rdf", "xsd", "prov", "dcat", "dcterms", "qudt", "robovast", "smm"):
        assert prefix in table
    assert table.entries["ex"] == "https://example.org/"
    assert set(BUILTIN_PREFIXES) <= set(table)


def test_prefix_table_rejects_empty_namespace():
    with pytest.raises(ValueError):
        PrefixTable({"ex": ""})


@pytest.mark.parametrize("bad", ["no-scheme", "https://a b", "", "://x"])
def test_check_iri_rejects(bad):
    with pytest.raises(InvalidIri):
        check_iri(bad)
