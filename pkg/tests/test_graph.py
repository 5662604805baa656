import json

import pytest

from netreinforce.errors import DanglingReferenceError, GraphFormatError
from netreinforce.graph import Network, build_hypercube, build_path, load_network, parse_graphml

DOC = """<?xml version="1.0"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <graph edgedefault="{default}">
    <node id="x"/>
    <node id="y"/>
    <node id="z"/>
    <edge source="x" target="y"/>
    <edge source="y" target="z" {extra}/>
  </graph>
</graphml>
"""


def test_small5_fixture_shape(small5):
    assert small5.n == 5
    assert len(small5.undirected_edges) == 6
    assert small5.m == 12
    assert small5.labels == ("a", "b", "c", "d", "e")
    assert small5.is_connected()


def test_undirected_default_expands_to_arc_pairs():
    g = parse_graphml(DOC.format(default="undirected", extra=""))
    assert g.arcs == ((0, 1), (1, 0), (1, 2), (2, 1))


def test_directed_default_and_per_edge_override():
    g = parse_graphml(DOC.format(default="directed", extra=""))
    assert g.arcs == ((0, 1), (1, 2))
    g = parse_graphml(DOC.format(default="directed", extra='directed="false"'))
    assert g.arcs == ((0, 1), (1, 2), (2, 1))


def test_self_loops_and_parallel_edges_collapse():
    doc = DOC.replace('<edge source="x" target="y"/>', '<edge source="x" target="x"/><edge source="z" target="y"/>')
    g = parse_graphml(doc.format(default="undirected", extra=""))
    assert g.arcs == ((1, 2), (2, 1))


def test_empty_document_is_an_error():
    with pytest.raises(GraphFormatError):
        parse_graphml('<graphml><graph edgedefault="undirected"></graph></graphml>')


def test_dangling_edge_reports_line():
    doc = DOC.format(default="undirected", extra="").replace('target="z"', 'target="q"')
    with pytest.raises(DanglingReferenceError) as info:
        parse_graphml(doc, source="bad.graphml")
    assert info.value.line == 8
    assert "bad.graphml:8:" in str(info.value)


def test_malformed_xml_reports_line():
    with pytest.raises(GraphFormatError) as info:
        parse_graphml("<graphml>\n<graph>\n<node id='a'>\n</graphml>")
    assert info.value.line == 4


def test_duplicate_node_id_rejected():
    with pytest.raises(GraphFormatError):
        parse_graphml("<graphml><graph><node id='a'/><node id='a'/></graph></graphml>")


def test_network_validation():
    with pytest.raises(ValueError):
        Network(2, ((0, 0),))
    with pytest.raises(ValueError):
        Network(2, ((0, 2),))
    with pytest.raises(ValueError):
        Network(2, ((0, 1), (0, 1)))
    with pytest.raises(ValueError):
        Network(2, (), labels=("a", "a"))


@pytest.mark.parametrize("q,d,wrap,edges", [(6, 2, False, 60), (4, 3, False, 144), (4, 2, True, 32), (2, 1, False, 1)])
def test_hypercube_edge_counts(q, d, wrap, edges):
    g = build_hypercube(q, d, wrap)
    assert g.n == q**d
    assert len(g.undirected_edges) == edges


def test_hypercube_lexicographic_numbering():
    g = build_hypercube(3, 2)
    # (1, 1) is node 4; neighbours (0,1), (1,0), (1,2), (2,1)
    assert g.neighbors[4] == (1, 3, 5, 7)


def test_path_is_one_way():
    g = build_path(4)
    assert g.arcs == ((0, 1), (1, 2), (2, 3))
    assert g.in_neighbors[0] == ()


def test_json_round_trip(small5, tmp_path):
    again = Network.from_json(json.loads(small5.dumps()))
    assert again == small5
    path = tmp_path / "g.json"
    path.write_text(small5.dumps())
    assert load_network(str(path)) == small5


def test_load_network_generators():
    assert load_network("path:7").n == 7
    assert load_network("hypercube:3:2:wrap").m == 2 * 18
    with pytest.raises(ValueError):
        load_network("hypercube:3")


def test_node_index_by_label_and_number(small5):
    assert small5.node_index("c") == 2
    assert small5.node_index("4") == 4
    with pytest.raises(KeyError):
        small5.node_index("zz")


def test_components_of_induced_subgraph(small5):
    assert small5.components([0, 3, 4]) == [[0], [3, 4]]


def test_net33_fixture(net33):
    assert net33.n == 33
    assert net33.is_connected()
    assert len(net33.undirected_edges) < 2 * 33
