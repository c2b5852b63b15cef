import pytest

from models.chaincomplex import Bigrading, ChainElement, EnhancedState, element_from_text
from models.cobordism import (
    UNIT,
    InducedMap,
    build_movie,
    check_chain_map,
    event_map,
    induced_map,
    kj_cycle,
    movie_from_json,
    movie_to_json,
    validate_movie,
)
from models.config import fixture_path, read_fixture_file
from models.diagram import EMPTY
from models.errors import (
    FrameMismatchError,
    IllegalEventError,
    KJClassError,
    ParseError,
    UnsupportedEventError,
)
from models.events import Step, birth, r1_add


def load_movie(name):
    return movie_from_json(read_fixture_file(fixture_path("movies", f"{name}.movie.json")))


def expected(name, d):
    return element_from_text(read_fixture_file(fixture_path("expected", f"{name}.chain")), d)


@pytest.mark.parametrize("name", ["disk", "annulus", "punctured_torus"])
def test_fixture_cycles(name):
    m = load_movie(name)
    assert kj_cycle(m) == expected(name, m.final)


def test_fixture_cycle_bigradings():
    assert kj_cycle(load_movie("disk")).bigrading == Bigrading(0, 1)
    assert kj_cycle(load_movie("annulus")).bigrading == Bigrading(0, 0)
    assert kj_cycle(load_movie("punctured_torus")).bigrading == Bigrading(0, -1)


@pytest.mark.parametrize("name, value", [("sphere", 0), ("torus", 2)])
def test_closed_surfaces(name, value):
    cycle = kj_cycle(load_movie(name))
    assert cycle.terms.get(UNIT, 0) == value


def test_kinked_disk():
    cycle = kj_cycle(load_movie("kinked_disk"))
    assert cycle.terms == {EnhancedState((0,), "1x"): 1, EnhancedState((0,), "x1"): -1}
    assert cycle.bigrading == Bigrading(0, 1)


def test_movie_properties():
    m = load_movie("punctured_torus")
    assert m.euler == -1
    assert m.genus == 1
    assert len(m.frames) == 4
    assert load_movie("annulus").genus == 0


def test_json_round_trip():
    m = load_movie("punctured_torus")
    again = movie_from_json(movie_to_json(m))
    assert again.events == m.events
    assert again.final == m.final


@pytest.mark.parametrize("name, error", [
    ("bad_event", IllegalEventError),
    ("r3", UnsupportedEventError),
])
def test_bad_movies(name, error):
    with pytest.raises(error):
        load_movie(name)


def test_illegal_event_names_its_frame():
    with pytest.raises(IllegalEventError) as info:
        load_movie("bad_event")
    assert info.value.frame == 1


@pytest.mark.parametrize("raw", [
    "not json",
    '{"events": [{"type": "teleport"}]}',
    '{"events": [{"type": "r1", "edge": 1}]}',
    '{"events": [{"type": "birth"}, {"type": "saddle", "edges": [1]}]}',
    '{"events": [{"type": "death"}]}',
])
def test_malformed_movies(raw):
    with pytest.raises(ParseError):
        validate_movie(raw)


def test_expect_pd_mismatch():
    raw = {"events": [{"type": "birth"}], "expect_pd": {"1": "PD[O(1), O(2)]"}}
    with pytest.raises(FrameMismatchError) as info:
        validate_movie(raw)
    assert info.value.frame == 1


def test_declared_euler_checked():
    with pytest.raises(IllegalEventError):
        validate_movie({"events": [{"type": "birth"}], "euler": 0})


def test_cycle_needs_empty_start(trefoil):
    m = build_movie(trefoil, [r1_add(1, 1, "L")])
    with pytest.raises(KJClassError):
        kj_cycle(m)


def test_composition_matches_single_map(trefoil):
    f = event_map(trefoil, r1_add(1, 1, "L"))
    g = event_map(f.target, r1_add(2, -1, "R"))
    h = f.then(g)
    check_chain_map(h)
    e = ChainElement.generator(trefoil, EnhancedState((0, 0, 0), "1x"))
    assert h(e) == g(f(e))


def test_movie_map_is_a_chain_map():
    m = build_movie(EMPTY, [birth(), r1_add(1, -1, "L"), r1_add(1, 1, "R")])
    check_chain_map(induced_map(m))
    assert m.final.n == 2
    assert m.euler == 1


def test_chain_map_check_rejects_a_projection(trefoil):
    keep_oriented = Step(trefoil, trefoil, 0, lambda g: {g: 1} if not any(g.bits) else {})
    with pytest.raises(KJClassError, match="chain map identity fails"):
        check_chain_map(InducedMap(trefoil, trefoil, [keep_oriented]))


def test_map_matrix_checks_bigrading(trefoil):
    shifted = Step(trefoil, trefoil, 0, lambda g: {EnhancedState((1, 1, 1), "xx"): 1})
    with pytest.raises(KJClassError, match="outside bigrading"):
        check_chain_map(InducedMap(trefoil, trefoil, [shifted]))
