from models.builders import load_diagram
from models.chaincomplex import build_complex
from models.diagram import parse_pd
from models.homology import homology_groups
from models.rewrite import DiagramEditor, find_isomorphism, renumbered, smooth_crossing


def free_ranks(d):
    return {tuple(b): g.free_rank for b, g in homology_groups(build_complex(d)).items() if g.free_rank}


def test_renumbered_is_stable(trefoil):
    assert renumbered(trefoil) == trefoil


def test_editor_appends_new_edges(trefoil):
    ed = DiagramEditor(trefoil)
    assert ed.new_edge() == 7
    head = ed.head(3)
    e1, e2, e3 = ed.cut(3, 2)
    assert (e1, e2, e3) == (3, 8, 9)
    assert ed.head(3) is None and ed.head(9) == head
    ed.add_crossing([e1, e3, e2, e2], 1)
    after, renum, cmap = ed.freeze()
    assert (renum[e2], renum[e3]) == (7, 8)
    assert after.n == 4 and after.crossings[3].sign == 1
    assert cmap == {0: 0, 1: 1, 2: 2, 3: 3}


def test_editor_cut_then_rejoin(trefoil):
    ed = DiagramEditor(trefoil)
    head = ed.head(3)
    assert ed.cut(3, 1) == [3, 7]
    ed.set_port(head, 3)
    after, renum, _ = ed.freeze()
    assert (after.crossings, after.loops) == (trefoil.crossings, trefoil.loops)
    assert 7 not in renum


def test_editor_splice_rejoins_strands():
    d = parse_pd("PD[X(1,1,2,2)]")
    ed = DiagramEditor(d)
    chains = ed.splice([0])
    after, _, _ = ed.freeze()
    assert after.n == 0
    assert len(after.loops) == 1
    assert list(chains.values()) == [[1, 2]]


def test_oriented_smoothing_of_trefoil_is_positive_hopf(trefoil):
    after, origin, cmap = smooth_crossing(trefoil, 0, 0)
    assert after.n == 2
    assert [c.sign for c in after.crossings] == [1, 1]
    assert len(after.components) == 2
    assert cmap == {1: 0, 2: 1}
    assert sorted(e for members in origin.values() for e in members) == [1, 2, 3, 4, 5, 6]
    assert free_ranks(after) == {(0, 0): 1, (0, 2): 1, (2, 4): 1, (2, 6): 1}


def test_unoriented_smoothing_of_trefoil_is_unknot(trefoil):
    after, _, _ = smooth_crossing(trefoil, 0, 1)
    assert len(after.components) == 1
    assert free_ranks(after) == {(0, -1): 1, (0, 1): 1}


def test_smoothing_a_kink_leaves_loops():
    after, _, _ = smooth_crossing(load_diagram("unknot_kink"), 0, 0)
    assert after.n == 0
    assert len(after.loops) == 2


def test_isomorphism_up_to_crossing_order(trefoil):
    b = parse_pd("PD[X(2,6,3,5), X(4,2,5,1), X(6,4,1,3)]")
    perm, emap = find_isomorphism(trefoil, b)
    assert sorted(perm) == [0, 1, 2]
    for i, c in enumerate(trefoil.crossings):
        assert tuple(emap[e] for e in c.ports) == b.crossings[perm[i]].ports


def test_no_isomorphism_between_different_diagrams(trefoil, figure8, hopf):
    assert find_isomorphism(trefoil, figure8) is None
    assert find_isomorphism(hopf, smooth_crossing(trefoil, 0, 0)[0]) is None
