import pytest

from models.builders import braid_closure, find_bigon
from models.chaincomplex import EnhancedState
from models.cobordism import InducedMap, check_chain_map, event_map
from models.diagram import EMPTY, parse_pd
from models.errors import IllegalEventError, UnsupportedEventError
from models.events import (
    MovieEvent,
    apply_event,
    birth,
    death,
    finger_variant,
    isotopy,
    r1_add,
    r1_remove,
    r2_add,
    r2_remove,
    reorder_sign,
    saddle,
)

UNKNOT = parse_pd("PD[O(1)]")
UNLINK2 = parse_pd("PD[O(1), O(2)]")
KINKS = [(1, "L"), (1, "R"), (-1, "L"), (-1, "R")]
FINGERS = [("L", True), ("L", False), ("R", True), ("R", False)]


def gen(labels, bits=()):
    return EnhancedState(tuple(bits), labels)


def test_birth_adds_a_loop_labelled_one():
    step = apply_event(EMPTY, birth())
    assert step.after == UNKNOT
    assert step.info["loop"] == 1
    assert step.apply(gen("")) == {gen("1"): 1}


def test_death_is_the_counit():
    step = apply_event(UNKNOT, death(1))
    assert step.after == EMPTY
    assert step.apply(gen("1")) == {}
    assert step.apply(gen("x")) == {gen(""): 1}


def test_split_and_merge():
    split = apply_event(UNKNOT, saddle(1, 1))
    assert split.after == UNLINK2
    assert split.info["arcs"] == (1, 2)
    assert split.apply(gen("1")) == {gen("1x"): 1, gen("x1"): 1}
    assert split.apply(gen("x")) == {gen("xx"): 1}
    merge = apply_event(UNLINK2, saddle(1, 2))
    assert merge.after == UNKNOT
    assert merge.apply(gen("1x")) == {gen("x"): 1}
    assert merge.apply(gen("xx")) == {}


@pytest.mark.parametrize("sign, side", KINKS)
def test_kink_add_then_remove_is_identity(sign, side):
    add = apply_event(UNKNOT, r1_add(1, sign, side))
    assert add.after.n == 1 and add.after.crossings[0].sign == sign
    remove = apply_event(add.after, r1_remove(add.info["loop"], sign, side))
    assert remove.after == UNKNOT
    f = InducedMap(UNKNOT, UNKNOT, [add, remove])
    for labels in ("1", "x"):
        assert f.on_generator(gen(labels)) == {gen(labels): 1}


@pytest.mark.parametrize("sign, side", KINKS)
def test_kink_maps_are_chain_maps(trefoil, sign, side):
    check_chain_map(event_map(trefoil, r1_add(2, sign, side)))


def test_kink_removal_checks_the_kink():
    add = apply_event(UNKNOT, r1_add(1, 1, "R"))
    loop = add.info["loop"]
    with pytest.raises(IllegalEventError):
        apply_event(add.after, r1_remove(loop, 1, "L"))
    with pytest.raises(IllegalEventError):
        apply_event(add.after, r1_remove(add.info["edge"], 1, "R"))


@pytest.mark.parametrize("side, parallel", FINGERS)
def test_finger_move_round_trip(side, parallel):
    add = apply_event(UNLINK2, r2_add(1, 2, side, parallel))
    after = add.after
    assert after.n == 2
    assert sorted(c.sign for c in after.crossings) == [-1, 1]
    assert finger_variant(after, add.info["over"], add.info["under"]) == (side, parallel)
    check_chain_map(InducedMap(UNLINK2, after, [add]))
    remove = apply_event(after, r2_remove(add.info["over"], add.info["under"]))
    assert remove.after == UNLINK2
    f = InducedMap(UNLINK2, UNLINK2, [add, remove])
    for labels in ("11", "1x", "x1", "xx"):
        assert f.on_generator(gen(labels)) == {gen(labels): 1}


def test_finger_needs_two_edges():
    with pytest.raises(IllegalEventError):
        apply_event(UNLINK2, r2_add(1, 1))


def test_r3_is_reserved():
    with pytest.raises(UnsupportedEventError):
        apply_event(UNKNOT, MovieEvent("r3"))


def test_missing_edge_reports_frame():
    with pytest.raises(IllegalEventError) as info:
        apply_event(EMPTY, saddle(1, 1), frame=3)
    assert info.value.frame == 3


def test_incoherent_band_needs_two_components():
    with pytest.raises(IllegalEventError):
        apply_event(UNKNOT, saddle(1, 1, pairing="1"))


def test_incoherent_band_on_unlink():
    step = apply_event(UNLINK2, saddle(1, 2, pairing="1"))
    assert step.after == UNKNOT


def test_isotopy_reorders_crossings(trefoil):
    step = apply_event(trefoil, isotopy("PD[X(2,6,3,5), X(4,2,5,1), X(6,4,1,3)]"))
    assert step.after.n == 3
    check_chain_map(InducedMap(trefoil, step.after, [step]))


def test_isotopy_rejects_other_diagrams(trefoil):
    with pytest.raises(IllegalEventError):
        apply_event(trefoil, isotopy("PD[O(1)]"))


def test_reorder_sign():
    assert reorder_sign((1, 1, 0), [0]) == -1
    assert reorder_sign((1, 0, 1), [1]) == 1
    assert reorder_sign((1, 1, 1), [0, 1]) == 1


def test_bigon_removal_across_strands_is_a_chain_map():
    d = braid_closure([2, 1, -1], 3)
    check_chain_map(event_map(d, r2_remove(1, 5)))


def test_found_bigon_removal_is_a_chain_map():
    d = braid_closure([-1, -2, 2, 1], 3)
    ev = find_bigon(d)
    assert ev is not None
    check_chain_map(event_map(d, ev))


def test_bigon_removal_on_random_braids(rng):
    for _ in range(40):
        word = [rng.choice((1, -1, 2, -2)) for _ in range(rng.randint(1, 3))]
        i, at = rng.choice((1, -1, 2, -2)), rng.randint(0, len(word))
        d = braid_closure(word[:at] + [i, -i] + word[at:], 3)
        ev = find_bigon(d)
        assert ev is not None, word
        check_chain_map(event_map(d, ev))


def test_isotopy_target_keeps_crossing_signs():
    d = braid_closure([1, -1])
    step = apply_event(d, isotopy(d.to_pd(), d))
    assert [c.sign for c in step.after.crossings] == [c.sign for c in d.crossings]
    check_chain_map(InducedMap(d, step.after, [step]))
