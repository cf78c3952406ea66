import pytest

from vquery import ParseError, Term, UnsupportedFeature, iri, parse_query
from vquery.parser import Aggregate
from vquery.terms import RDF_TYPE, XSD_INTEGER

TWO_HOP = """
SELECT COUNT(*) WHERE {
    ?p1 :knows ?p2 .
    ?p2 :knows ?p3 .
    ?p3 :interest ?i .
    FILTER(?p1 != ?p3)
}
"""


def test_two_hop_query_shape():
    q = parse_query(TWO_HOP)
    assert len(q.patterns) == 3
    assert len(q.filters) == 1
    assert q.aggregates == [Aggregate("count", None)]
    assert q.group_by is None
    f = q.filters[0]
    assert (f.op, f.left, f.right) == ("!=", "p1", "p3")


def test_select_star_wildcard():
    q = parse_query("SELECT * { ?s ?p ?o }")
    assert q.select_all
    assert q.patterns == [("s", "p", "o")]


def test_prefixed_names_and_a_keyword():
    q = parse_query("SELECT ?x WHERE { ?x a :Widget . "
                    "?x rdf:type xsd:thing }")
    s, p, o = q.patterns[0]
    assert p == iri(RDF_TYPE)
    assert o == iri("http://example.org/Widget")
    assert q.patterns[1][1] == iri(RDF_TYPE)


def test_literals():
    q = parse_query('SELECT ?x WHERE { ?x :age 42 . ?x :name "Ada"@en . '
                    '?x :tag "x\\"y" }')
    assert q.patterns[0][2] == Term("literal", "42", datatype=XSD_INTEGER)
    assert q.patterns[1][2] == Term("literal", "Ada", langtag="en")
    assert q.patterns[2][2] == Term("literal", 'x"y')


def test_distinct_group_limit():
    q = parse_query("SELECT DISTINCT ?x WHERE { ?x :p ?y } LIMIT 10")
    assert q.distinct and q.limit == 10
    q2 = parse_query("SELECT ?x COUNT(?y) WHERE { ?x :p ?y } GROUP BY ?x")
    assert q2.group_by == "x"
    assert q2.aggregates == [Aggregate("count", "y")]


def test_aggregates_variants():
    q = parse_query("SELECT COUNT(DISTINCT ?y) MIN(?y) MAX(?y) SUM(?y) "
                    "AVG(?y) (?z is not here) WHERE { ?x :p ?y }"
                    .replace("(?z is not here) ", ""))
    kinds = [(a.kind, a.distinct) for a in q.aggregates]
    assert kinds == [("count", True), ("min", False), ("max", False),
                     ("sum", False), ("avg", False)]


def test_aggregate_alias():
    q = parse_query("SELECT COUNT(*) AS ?n WHERE { ?x :p ?y }")
    assert q.aggregates[0].alias == "n"


def test_union_branches():
    q = parse_query("SELECT ?x WHERE { { ?x :a ?y } UNION { ?x :b ?y } "
                    "UNION { ?x :c ?y } }")
    assert len(q.unions) == 3
    assert not q.patterns


def test_union_with_shared_patterns():
    q = parse_query("SELECT ?x WHERE { ?x :t ?k . "
                    "{ ?x :a ?y } UNION { ?x :b ?y } }")
    assert len(q.patterns) == 1 and len(q.unions) == 2


@pytest.mark.parametrize("text", [
    "SELECT ?x WHERE { ?x :p ?y OPTIONAL { ?y :q ?z } }",
    "SELECT ?x WHERE { SERVICE <http://x/> { ?x :p ?y } }",
    "SELECT ?x WHERE { ?x :p ?y MINUS { ?x :q ?y } }",
    "SELECT ?x WHERE { ?x :p/:q ?y }",
    "SELECT ?x WHERE { ?x :p ?y } ORDER BY ?x",
])
def test_unsupported_features_are_flagged(text):
    with pytest.raises(UnsupportedFeature):
        parse_query(text)


@pytest.mark.parametrize("text", [
    "ELECT ?x WHERE { ?x :p ?y }",
    "SELECT WHERE { ?x :p ?y }",
    "SELECT ?x { ?x :p }",
    "SELECT ?x { ?x :p ?y ",
    "SELECT ?x { ?x unknownprefix:p ?y }",
    "SELECT ?x { ?x :p ?y } LIMIT -1",
    "SELECT ?x { ?x :p ?y } GROUP BY 3",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_query(text)


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse_query("SELECT ?x WHERE {\n  ?x :p %%% \n}")
    assert e.value.line is not None


def test_error_position_points_at_offender():
    try:
        parse_query("SELECT ?x WHERE { ?x :p ?y . } LIMIT x")
    except ParseError as e:
        assert e.line == 1 and e.column > 30
    else:  # pragma: no cover
        raise AssertionError("expected ParseError")


def test_filters_bound():
    q = parse_query("SELECT ?x WHERE { ?x :p ?y FILTER(BOUND(?y)) "
                    "FILTER(!BOUND(?x)) FILTER(?y > 3) }")
    assert q.filters[0].var == "y" and not q.filters[0].negated
    assert q.filters[1].negated
    assert q.filters[2].op == ">"
