from __future__ import annotations

import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetasphere.errors import GraphParseError, GraphValidationError, SizeCapError
from thetasphere.graph import (
    Graph,
    block_nodes,
    blocks,
    blow_up,
    chromatic_number,
    clique_number,
    clique_sum,
    complement,
    components,
    contract,
    direct_sum,
    exact_combinatorics,
    format_graph,
    gadget_h,
    generate,
    is_bipartite,
    moser_spindle,
    neighborhood,
    parse_graph,
    random_graph,
    read_graph,
)


@st.composite
def graphs(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, [e for e, k in zip(pairs, keep) if k])


def _isomorphic(G, H):
    return nx.is_isomorphic(G.to_networkx(), H.to_networkx())


def test_parse_smallest_edge():
    G = parse_graph("p 2 1\ne 1 2\n")
    assert G.n == 2 and G.edges == ((0, 1),)


def test_parse_empty_graph_and_comments():
    G = parse_graph("c nothing here\np 3 0\n")
    assert G.n == 3 and G.m == 0


def test_parse_accepts_edge_keyword_and_weights():
    G = parse_graph("p edge 3 2\ne 1 2\ne 2 3\nn 2 1.5\n")
    assert G.m == 2
    assert G.weights == (1.0, 1.5, 1.0)


def test_parse_rejects_loop():
    with pytest.raises(GraphValidationError):
        parse_graph("p 2 1\ne 1 1\n")


def test_parse_rejects_duplicate_edge():
    with pytest.raises(GraphValidationError):
        parse_graph("p 2 2\ne 1 2\ne 2 1\n")


def test_parse_reports_line_of_bad_record():
    with pytest.raises(GraphParseError) as info:
        parse_graph("p 3 1\ne 1 x\n")
    assert info.value.line == 2


def test_parse_edge_count_mismatch():
    with pytest.raises(GraphParseError):
        parse_graph("p 3 2\ne 1 2\n")


def test_parse_missing_header():
    with pytest.raises(GraphParseError):
        parse_graph("e 1 2\n")


def test_read_graph_roundtrip(tmp_path):
    G = generate("petersen")
    path = tmp_path / "p.gr"
    path.write_text(format_graph(G))
    assert read_graph(path) == G


@given(graphs())
def test_format_parse_roundtrip(G):
    assert parse_graph(format_graph(G)) == G


def test_complement_of_triangle_is_empty():
    H = complement(generate("complete", 3))
    assert H.n == 3 and H.m == 0


def test_c5_is_self_complementary():
    C5 = generate("cycle", 5)
    assert _isomorphic(complement(C5), C5)


@given(graphs())
def test_complement_is_involution(G):
    assert complement(complement(G)) == G
    assert G.m + complement(G).m == G.n * (G.n - 1) // 2


def test_contract_k4_edge():
    H, mm = contract(generate("complete", 4), (0, 1))
    assert _isomorphic(H, generate("complete", 3))
    assert len(mm.merged) == 2
    for f in mm.merged:
        assert len(mm.preimage(f)) == 2


def test_contract_c5_gives_c4():
    H, _ = contract(generate("cycle", 5), (2, 3))
    assert _isomorphic(H, generate("cycle", 4))


def test_contract_single_edge():
    H, mm = contract(generate("complete", 2), (0, 1))
    assert H.n == 1 and H.m == 0 and not mm.merged


def test_contract_rejects_non_edge():
    with pytest.raises(ValueError):
        contract(generate("cycle", 5), (0, 2))


def test_blow_up_examples():
    K2 = generate("complete", 2)
    assert _isomorphic(blow_up(K2, (2, 2)), generate("complete", 4))
    assert _isomorphic(blow_up(K2, (1, 2)), generate("complete", 3))


@given(graphs())
def test_blow_up_all_ones_is_identity(G):
    H = blow_up(G, [1] * G.n)
    assert (H.n, H.edges) == (G.n, G.edges)


def test_direct_sum_counts():
    S = direct_sum(generate("complete", 3), generate("complete", 2))
    assert (S.n, S.m, len(components(S))) == (5, 4, 2)
    G = generate("petersen")
    assert direct_sum(G, Graph(0)) == G


@given(graphs(5), graphs(5))
def test_direct_sum_component_count(G, H):
    assert len(components(direct_sum(G, H))) == len(components(G)) + len(components(H))


def test_clique_sum_two_triangles():
    K3 = generate("complete", 3)
    G, where = clique_sum(K3, [0, 1], K3, [0, 1])
    assert G.n == 4 and G.m == 5
    assert where[0] == 0 and where[1] == 1


def test_clique_sum_rejects_non_clique():
    C5 = generate("cycle", 5)
    with pytest.raises(ValueError):
        clique_sum(C5, [0, 2], C5, [0, 1])


def test_blocks():
    bowtie = Graph(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])
    bs = blocks(bowtie)
    assert len(bs) == 2 and all(_isomorphic(B, generate("complete", 3)) for B in bs)
    assert len(blocks(generate("complete", 5))) == 1
    assert sorted(len(b) for b in block_nodes(generate("path", 4))) == [2, 2, 2]


def test_generators():
    K4 = generate("complete", 4)
    assert K4.m == 6
    S = generate("moser_spindle")
    assert (S.n, S.m) == (7, 11)
    comb = exact_combinatorics(S)
    assert (comb.omega, comb.chi) == (3, 4)
    assert not is_bipartite(generate("cycle", 5))
    assert generate("petersen").m == 15


def test_gadget_h_contains_two_spindles():
    H = gadget_h()
    assert H.n == 11 and H.m == 19
    assert H.find("i") != H.find("j")
    assert not H.has_edge(H.find("i"), H.find("j"))
    assert nx.is_connected(H.to_networkx())


def test_moser_spindle_labels():
    S = moser_spindle()
    assert [S.label(i) for i in range(7)] == list("abcdefg")


def test_unknown_family():
    with pytest.raises(ValueError):
        generate("wheel", 5)


def test_exact_combinatorics_small_cases():
    for G, want in [
        (generate("complete", 4), (4, 4, False)),
        (generate("cycle", 5), (2, 3, False)),
        (generate("path", 3), (2, 2, True)),
    ]:
        c = exact_combinatorics(G)
        assert (c.omega, c.chi, c.is_bipartite) == want


def test_brute_force_cap():
    with pytest.raises(SizeCapError):
        chromatic_number(random_graph(13, 0.5, seed=1))


@settings(max_examples=40)
@given(graphs())
def test_combinatorics_against_networkx(G):
    nxg = G.to_networkx()
    omega = max((len(c) for c in nx.find_cliques(nxg)), default=0) if G.n else 0
    assert clique_number(G) == max(omega, 1 if G.n else 0)
    assert is_bipartite(G) == nx.is_bipartite(nxg)
    chi = chromatic_number(G)
    assert clique_number(G) <= chi <= max(dict(nxg.degree()).values(), default=0) + 1


def test_neighborhood_examples():
    assert _isomorphic(neighborhood(generate("complete", 5), 2), generate("complete", 4))
    N = neighborhood(generate("cycle", 5), 0)
    assert N.n == 2 and N.m == 0
    star = Graph(4, [(0, 1), (0, 2), (0, 3)])
    N = neighborhood(star, 0)
    assert N.n == 3 and N.m == 0


def test_graph_validation():
    with pytest.raises(GraphValidationError):
        Graph(3, [(0, 3)])
    with pytest.raises(GraphValidationError):
        Graph(2, [(1, 1)])
