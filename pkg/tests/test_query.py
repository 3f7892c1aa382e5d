import json
from decimal import Decimal

import numpy as np
import pytest
from hypothesis import given, settings

from fairprov import _kernels_py, kernels
from fairprov.errors import QuerySyntaxError, QueryTypeError, UnsupportedFeature
from fairprov.ldgraph import Literal
from fairprov.query import (
    PathAlt,
    PathPred,
    PathSeq,
    PathStar,
    TripleStore,
    bundled_query,
    eval_path,
    parse_query,
    query,
    render,
)
from fairprov.vocab import PROV, RDF_TYPE, ROBOVAST, SMM

from oracles import bfs, edges, input_closure, rate
from strategies import small_graphs

EX = "https://purl.org/test/"
PREFIXES = "PREFIX ex: <https://purl.org/test/>\n"


def _fixture(n_fail, n_total, conf=EX + "conf"):
    triples = [(conf, RDF_TYPE, SMM.ConcreteScenario)]
    for i in range(n_total):
        run = f"{EX}run{i}"
        triples += [
            (run, RDF_TYPE, ROBOVAST.TestExecution),
            (run, PROV.used, conf),
            (run, ROBOVAST.success, Literal.of(i >= n_fail)),
        ]
    return triples


@pytest.mark.parametrize("name", ["failure_rate", "input_files", "input_files_joined"])
def test_bundled_queries_parse(name):
    ast = parse_query(bundled_query(name))
    assert ast.group_by == ["conf"]


def test_failure_rate_query_ast():
    ast = parse_query(bundled_query("failure_rate"))
    assert ast.columns() == ["conf", "rate", "total"]
    assert [b.var for b in ast.binds] == ["fail"]
    assert sorted(a.name for a in ast.aggregates) == ["COUNT", "COUNT", "SUM"]


def test_input_files_path_shape():
    ast = parse_query(bundled_query("input_files"))
    path = [p.path for p in ast.patterns if isinstance(p.path, PathSeq)][0]
    assert path.items[0] == PathPred(PROV.used)
    assert isinstance(path.items[1], PathStar) and isinstance(path.items[1].item, PathAlt)
    assert len(path.items[1].item.items) == 3


@pytest.mark.parametrize(
    "n_fail, n_total, expected",
    [(19, 20, "95.0"), (0, 10, "0.0"), (10, 10, "100.0"), (1, 2, "50.0"), (1, 3, "33.3333")],
)
def test_failure_rate_values(n_fail, n_total, expected):
    table = query(_fixture(n_fail, n_total), bundled_query("failure_rate"))
    (row,) = table.as_dicts()
    value = float(row["rate"].lexical)
    assert value == pytest.approx(float(rate(n_fail, n_total)), abs=1e-9)
    assert row["rate"].lexical.startswith(expected)
    assert row["total"] == Literal.of(n_total)


def test_failure_rate_demo(demo_graph_frozen):
    rows = query(demo_graph_frozen, bundled_query("failure_rate")).as_dicts()
    got = {r["conf"].rsplit("/", 1)[1]: (float(r["rate"].to_python()), r["total"].to_python()) for r in rows}
    assert got == {"c_0000": (0.0, 2), "c_0001": (50.0, 2)}


def test_joined_input_files_match_oracle(demo_graph_frozen):
    triples = list(demo_graph_frozen.triples())
    oracle = input_closure(triples)
    rows = query(demo_graph_frozen, bundled_query("input_files_joined")).as_dicts()
    got = {r["conf"]: set(r["fs"].lexical.split(",")) for r in rows}
    assert got == oracle


def test_verbatim_input_files_is_a_cross_product(demo_graph_frozen):
    rows = query(demo_graph_frozen, bundled_query("input_files")).as_dicts()
    closure = input_closure(demo_graph_frozen.triples())
    union = set().union(*bfs_all_runs(demo_graph_frozen))
    assert len(rows) == len(closure) == 1
    assert set(rows[0]["fs"].lexical.split(",")) == union


def bfs_all_runs(doc):
    triples = list(doc.triples())
    adj = edges(triples)
    star = [t for t in ("http://purl.org/dc/terms/references", PROV.hadMember, PROV.atLocation)]
    for s, p, o in triples:
        if p == RDF_TYPE and o == ROBOVAST.TestExecution:
            yield bfs(adj, adj.get(PROV.used, {}).get(s, []), star)


CHAIN = [(EX + "a", EX + "p", EX + "b"), (EX + "b", EX + "p", EX + "c"), (EX + "c", EX + "q", EX + "d")]


@pytest.mark.parametrize(
    "path, expected",
    [
        (PathPred(EX + "p"), {"b"}),
        (PathStar(PathPred(EX + "p")), {"a", "b", "c"}),
        (PathSeq((PathPred(EX + "p"), PathPred(EX + "p"))), {"c"}),
        (PathSeq((PathStar(PathPred(EX + "p")), PathPred(EX + "q"))), {"d"}),
        (PathStar(PathAlt((PathPred(EX + "p"), PathPred(EX + "q")))), {"a", "b", "c", "d"}),
        (PathPred(EX + "q"), set()),
    ],
)
def test_eval_path(path, expected):
    assert eval_path(CHAIN, EX + "a", path) == {EX + x for x in expected}


def test_eval_path_cycle_terminates():
    cyc = [(EX + "a", EX + "p", EX + "b"), (EX + "b", EX + "p", EX + "a")]
    assert eval_path(cyc, EX + "a", PathStar(PathPred(EX + "p"))) == {EX + "a", EX + "b"}


def test_eval_path_unknown_start():
    assert eval_path(CHAIN, EX + "zz", PathStar(PathPred(EX + "p"))) == {EX + "zz"}
    assert eval_path(CHAIN, EX + "zz", PathPred(EX + "p")) == set()


@settings(max_examples=100, deadline=None)
@given(small_graphs())
def test_star_closure_matches_bfs(graph):
    n, raw = graph
    triples = [(f"{EX}n{s}", f"{EX}l{lab}", f"{EX}n{d}") for s, lab, d in raw]
    labels = [f"{EX}l0", f"{EX}l1"]
    adj = edges(triples)
    path = PathStar(PathAlt(tuple(PathPred(l) for l in labels)))
    store = TripleStore(triples)
    for i in range(n):
        start = f"{EX}n{i}"
        assert eval_path(store, start, path) == bfs(adj, [start], labels)


@settings(max_examples=60, deadline=None)
@given(small_graphs())
def test_kernel_backends_agree(graph):
    n, raw = graph
    src = [s for s, _, _ in raw]
    dst = [d for _, _, d in raw]
    indptr, indices = kernels.build_csr(n, src, dst)
    starts = np.arange(n, dtype=np.int64)
    a = kernels.reach_many(indptr, indices, starts, n)
    b = _kernels_py.reach_many(indptr, indices, starts, n)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_kernel_rejects_bad_start():
    indptr, indices = kernels.build_csr(2, [0], [1])
    for impl in (kernels.reach_many, _kernels_py.reach_many):
        with pytest.raises(IndexError):
            impl(indptr, indices, np.array([5]), 2)


def test_compiled_backend_available():
    assert kernels.BACKEND in ("cython", "python")


def test_filter_bind_and_plain_select():
    triples = [(EX + "a", EX + "v", Literal.of(1)), (EX + "b", EX + "v", Literal.of(5))]
    t = query(triples, PREFIXES + "SELECT ?s ?d WHERE { ?s ex:v ?x . FILTER(?x > 2) BIND(?x * 2 AS ?d) }")
    assert t.as_dicts() == [{"s": EX + "b", "d": Literal.of(10)}]
    t = query(triples, PREFIXES + "SELECT * WHERE { ?s ex:v ?x }")
    assert len(t) == 2 and t.columns == ("s", "x")


def test_filter_error_is_false_and_bind_error_unbinds():
    triples = [(EX + "a", EX + "v", Literal.of("text"))]
    t = query(triples, PREFIXES + "SELECT ?s WHERE { ?s ex:v ?x . FILTER(?x > 2) }")
    assert len(t) == 0
    nums = [(EX + "a", EX + "v", Literal.of(3))]
    t = query(nums, PREFIXES + "SELECT ?s ?y WHERE { ?s ex:v ?x . BIND(?x / 0 AS ?y) }")
    assert t.as_dicts() == [{"s": EX + "a", "y": None}]
    with pytest.raises(QueryTypeError):
        query(triples, PREFIXES + "SELECT ?s ?y WHERE { ?s ex:v ?x . BIND(?x / 2 AS ?y) }")


def test_sum_over_text_is_a_type_error():
    triples = [(EX + "a", EX + "v", Literal.of("text"))]
    with pytest.raises(QueryTypeError):
        query(triples, PREFIXES + "SELECT (SUM(?x) AS ?t) WHERE { ?s ex:v ?x }")


def test_group_concat_distinct_sorted():
    triples = [(EX + "g", EX + "m", EX + x) for x in "cab"] + [(EX + "g", EX + "m", EX + "a")]
    t = query(triples, PREFIXES + 'SELECT ?g (GROUP_CONCAT(DISTINCT ?x; SEPARATOR="|") AS ?xs) WHERE { ?g ex:m ?x } GROUP BY ?g')
    assert sorted(t.rows[0][1].lexical.split("|")) == [EX + "a", EX + "b", EX + "c"]


def test_empty_group_count_is_zero():
    t = query([], PREFIXES + "SELECT (COUNT(?s) AS ?n) WHERE { ?s ex:v ?x }")
    assert t.as_dicts() == [{"n": Literal.of(0)}]


@pytest.mark.parametrize(
    "body, feature",
    [
        ("SELECT ?s WHERE { ?s ex:p ?o OPTIONAL { ?s ex:q ?x } }", "OPTIONAL"),
        ("SELECT ?s WHERE { { ?s ex:p ?o } UNION { ?s ex:q ?o } }", "UNION"),
        ("SELECT ?s WHERE { ?s ex:p ?o } ORDER BY ?s", "ORDER BY"),
        ("SELECT ?s WHERE { ?s ex:p ?o } LIMIT 1", "LIMIT"),
        ("SELECT ?s WHERE { ?s ex:p+ ?o }", "one-or-more path '+'"),
        ("SELECT ?s WHERE { ?s ^ex:p ?o }", "inverse path '^'"),
        ("SELECT (AVG(?o) AS ?a) WHERE { ?s ex:p ?o }", "AVG"),
        ("ASK { ?s ex:p ?o }", "ASK"),
        ("SELECT ?s WHERE { ?s ex:p _:b }", "blank node"),
        ('SELECT ?s WHERE { ?s ex:p "x"@en }', "language-tagged literal"),
        ("SELECT ?s WHERE { ?s ex:p ?o FILTER(REGEX(?o, \"a\")) }", "REGEX"),
    ],
)
def test_unsupported_features(body, feature):
    with pytest.raises(UnsupportedFeature) as exc:
        parse_query(PREFIXES + body)
    assert exc.value.name == feature


@pytest.mark.parametrize(
    "text",
    [
        "SELECT ?s WHERE { ?s nope:p ?o }",
        PREFIXES + "SELECT ?s WHERE { ?s ex:p ?o ",
        PREFIXES + "SELECT ?s WHERE { ?s ex:p ?o . FILTER(COUNT(?o) > 1) }",
        PREFIXES + "SELECT ?s WHERE { ?s ex:p ?o . BIND(1 AS ?o) }",
        PREFIXES + "SELECT ?s (COUNT(?o) AS ?n) WHERE { ?s ex:p ?o }",
        PREFIXES + "SELECT ?s WHERE { ?s ex:p ?o } GROUP BY ?o",
        PREFIXES + "SELECT ?s WHERE { ?s ex:p ?o ~ }",
    ],
)
def test_syntax_errors(text):
    with pytest.raises(QuerySyntaxError):
        parse_query(text)


def test_render_formats():
    t = query(_fixture(1, 2), bundled_query("failure_rate"))
    csv = render(t, "csv").splitlines()
    assert csv[0] == "conf,rate,total" and csv[1] == f"{EX}conf,50.0,2"
    data = json.loads(render(t, "json"))
    assert data["head"]["vars"] == ["conf", "rate", "total"]
    assert data["results"]["bindings"][0]["conf"] == {"type": "uri", "value": EX + "conf"}
    assert render(t, "table").splitlines()[1].startswith("----")
