import pytest

from models.builders import load_diagram
from models.config import fixture_path, read_fixture_file
from models.diagram import (
    EMPTY,
    betti1,
    equal_up_to_renumbering,
    orientation_state,
    parse_pd,
    resolve,
    seifert_nesting,
    subgraph,
    trace_graph,
)
from models.errors import DimensionError, MissingNestingError, ParseError


def test_trefoil_is_positive(trefoil):
    assert [c.sign for c in trefoil.crossings] == [1, 1, 1]
    assert (trefoil.n_plus, trefoil.n_minus) == (3, 0)
    assert trefoil.components == ((1, 2, 3, 4, 5, 6),)


def test_figure8_signs(figure8):
    assert [c.sign for c in figure8.crossings] == [1, 1, -1, -1]


def test_hopf_link_has_two_negative_crossings(hopf):
    assert [c.sign for c in hopf.crossings] == [-1, -1]
    assert len(hopf.components) == 2


def test_kink_sign_from_over_strand():
    d = load_diagram("unknot_kink")
    assert d.crossings[0].sign == 1
    assert d.nesting == ()


@pytest.mark.parametrize("bits, circles", [((0, 0, 0), 2), ((1, 1, 1), 3), ((1, 0, 0), 1)])
def test_trefoil_resolutions(trefoil, bits, circles):
    assert len(resolve(trefoil, bits)) == circles


def test_figure8_all_zero_circles(figure8):
    res = resolve(figure8, (0, 0, 0, 0))
    assert [set(c) for c in res.circles] == [{1, 5}, {2, 4, 7}, {3, 6, 8}]
    assert res.circles[1][0] == 2


def test_circles_numbered_by_least_edge(trefoil):
    res = resolve(trefoil, (0, 0, 0))
    assert [min(c) for c in res.circles] == [1, 2]
    assert res.circle_of[5] == 0 and res.circle_of[6] == 1


def test_orientation_state_gives_seifert_circles(figure8):
    s = orientation_state(figure8)
    assert s.bits == (0, 0, 1, 1)
    assert [set(c) for c in resolve(figure8, s).circles] == [{1, 5}, {2, 4, 6, 8}, {3, 7}]


def test_figure8_gamma0_has_one_cycle(figure8):
    g = trace_graph(figure8, orientation_state(figure8))
    g0 = subgraph(g, 0)
    assert len(g0.graph.edges) == 2
    assert betti1(g0) == 1
    assert betti1(subgraph(g, 1)) == 1


def test_empty_diagram():
    assert parse_pd("PD[]") == EMPTY
    assert EMPTY.is_empty()
    assert len(resolve(EMPTY, ())) == 0


def test_loops_are_circles():
    d = parse_pd("PD[O(1), O(2)]")
    assert resolve(d, ()).circles == ((1,), (2,))
    assert d.components == ((1,), (2,))


def test_to_pd_parses_back(trefoil):
    assert parse_pd(trefoil.to_pd()) == trefoil


def test_nesting_order(trefoil, figure8):
    assert seifert_nesting(trefoil) == [1, 0]
    assert seifert_nesting(figure8) == [2, 1, 0]


def test_nesting_missing(hopf):
    with pytest.raises(MissingNestingError):
        seifert_nesting(hopf)


@pytest.mark.parametrize("nest", ["NEST[0>1,1>0]", "NEST[0>5]"])
def test_bad_nesting(nest):
    d = parse_pd(f"PD[X(4,2,5,1), X(6,4,1,3), X(2,6,3,5)] {nest}")
    with pytest.raises(MissingNestingError):
        seifert_nesting(d)


def test_renumbering_detects_relabelled_copy(trefoil):
    shifted = parse_pd("PD[X(14,12,15,11), X(16,14,11,13), X(12,16,13,15)]")
    mapping = equal_up_to_renumbering(trefoil, shifted)
    assert mapping == {e: e + 10 for e in range(1, 7)}
    assert equal_up_to_renumbering(trefoil, load_diagram("figure8")) is None


def test_malformed_fixture():
    with pytest.raises(ParseError):
        parse_pd(read_fixture_file(fixture_path("diagrams", "malformed.pd")))


@pytest.mark.parametrize("text", [
    "X(1,2,3,4)",
    "PD[X(1,2,3,4)]",
    "PD[X(1,1,2,2) X(3,3,4,4)]",
    "PD[X(1,1,2,a)]",
    "PD[O(1), O(1)]",
    "PD[X(1,1,2,2)] NEST[0-1]",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_pd(text)


def test_state_length_checked(trefoil):
    with pytest.raises(DimensionError):
        resolve(trefoil, (0, 1))
