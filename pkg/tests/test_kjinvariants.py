import pytest

from models import config, kjinvariants
from models.builders import Recorder, braid_closure, load_diagram, unlink_filling
from models.chaincomplex import Bigrading, ChainElement, EnhancedState, apply_differential, build_complex
from models.cobordism import kj_cycle, movie_from_json
from models.config import fixture_path, read_fixture_file
from models.errors import FrameMismatchError, KJClassError, ParseError, ResourceLimitError
from models.events import birth, death, r1_add, saddle
from models.kjinvariants import (
    SEIFERT_CORPUS,
    DistinctionReport,
    apply_trims,
    cap_movies,
    cap_pairings,
    corpus_diagram,
    distinguish_slices,
    extreme_grading_precheck,
    predict_seifert_kj,
    run_suite,
    seifert_movie,
    slice_obstruction,
    trim,
    verify_seifert_theorem,
)


def load_movie(name):
    return movie_from_json(read_fixture_file(fixture_path("movies", f"{name}.movie.json")))


@pytest.mark.parametrize("name", list(SEIFERT_CORPUS))
def test_prediction_kinds(name):
    source, arg, kind = SEIFERT_CORPUS[name]
    assert predict_seifert_kj(corpus_diagram(source, arg)).kind == kind


def test_prediction_for_a_kink():
    p = predict_seifert_kj(load_diagram("unknot_kink"))
    assert p.gamma0_betti == [0]
    assert p.element.terms == {EnhancedState((0,), "1x"): 1, EnhancedState((0,), "x1"): -1}
    assert p.marked == [(0, 1), (1, -1)]


def test_prediction_for_figure8(figure8):
    p = predict_seifert_kj(figure8)
    assert p.gamma0_betti == [1, 0]
    assert p.element.terms == {EnhancedState((0, 0, 1, 1), "xx1"): 2}
    assert p.element.bigrading == Bigrading(0, -1)


def test_prediction_for_trefoil_is_zero(trefoil):
    p = predict_seifert_kj(trefoil)
    assert p.gamma0_betti == [2]
    assert p.element.is_zero()


def test_seifert_movie_of_trefoil(trefoil):
    m = seifert_movie(trefoil)
    assert m.euler == -1
    assert m.genus == 1
    assert (m.final.crossings, m.final.loops) == (trefoil.crossings, trefoil.loops)


@pytest.mark.parametrize("name", ["unknot", "unknot_kink", "trefoil", "figure8"])
def test_seifert_theorem_on_fixtures(name):
    ok, report = verify_seifert_theorem(load_diagram(name))
    assert ok, report


@pytest.mark.parametrize("word", [(1, 2), (1, 1)])
def test_seifert_theorem_on_braids(word):
    ok, report = verify_seifert_theorem(braid_closure(word))
    assert ok, report


def test_trim_positive_crossing(trefoil):
    after, f = trim(trefoil, 0)
    assert after.n == 2
    assert f.shift == -1
    kept = ChainElement.generator(trefoil, EnhancedState((0, 0, 0), "11"))
    image = f(kept)
    assert image.terms == {EnhancedState((0, 0), "11"): 1}
    assert image.bigrading == Bigrading(0, 4)
    assert f(ChainElement.generator(trefoil, EnhancedState((1, 0, 0), "1"))).is_zero()


def test_trim_side_is_checked(trefoil):
    with pytest.raises(ParseError):
        trim(trefoil, 0, "M")
    with pytest.raises(KJClassError):
        trim(trefoil, 3)


def test_trim_schedule_uses_original_indices(trefoil):
    after, f = apply_trims(trefoil, [(2, "L"), (0, "L")])
    assert after.n == 1
    assert len(f.steps) == 2
    with pytest.raises(KJClassError):
        apply_trims(trefoil, [(1, "L"), (1, "R")])


def test_trims_commute_with_differential(trefoil):
    after, f = trim(trefoil, 1)
    c, c_after = build_complex(trefoil), build_complex(after)
    for h, q in c.bigradings():
        for g in c.generators(h, q):
            e = ChainElement.generator(trefoil, g)
            assert f(apply_differential(c, e)) == apply_differential(c_after, f(e))


def test_cap_pairings_on_annulus():
    cycle = kj_cycle(unlink_filling(2, 0))
    assert cap_pairings(cycle, 2) == {"C": 0, "C_0": 2, "C_1": 2, "C_0,1": 2}


def test_cap_movies_close_the_unlink():
    assert cap_movies(3).final.is_empty()
    assert cap_movies(3, 1).euler == 1
    assert cap_movies(3, (0, 2)).euler == 1
    with pytest.raises(KJClassError):
        cap_movies(2, (1, 1))
    with pytest.raises(KJClassError):
        cap_movies(2, 5)


def test_precheck():
    c = build_complex(load_diagram("unknot"))
    assert extreme_grading_precheck(c, ChainElement()) is True
    assert extreme_grading_precheck(c, ChainElement({EnhancedState((), "1"): 1}, Bigrading(0, 1))) is False


def test_precheck_defers_to_linear_algebra(trefoil):
    c = build_complex(trefoil)
    e = apply_differential(c, ChainElement.generator(trefoil, EnhancedState((0, 0, 0), "11")))
    assert extreme_grading_precheck(c, e) is None


def test_slice_obstruction(trefoil, figure8):
    assert slice_obstruction(load_diagram("unknot"))[0] == "inconclusive"
    assert slice_obstruction(trefoil)[0] == "obstructed"
    assert slice_obstruction(figure8)[0] == "inconclusive"


def test_slice_obstruction_needs_a_knot(hopf):
    with pytest.raises(KJClassError):
        slice_obstruction(hopf)


def test_same_movie_is_not_distinguished():
    report = distinguish_slices(load_movie("kinked_disk"), load_movie("kinked_disk"))
    assert not report.distinguished
    assert report.difference.is_boundary
    assert report.to_model().conclusion == "not distinguished"


def test_different_frames_are_rejected():
    with pytest.raises(FrameMismatchError):
        distinguish_slices(load_movie("disk"), load_movie("kinked_disk"))


def test_suite_gates(monkeypatch):
    monkeypatch.setattr(config, "ALLOW_LARGE", False)
    with pytest.raises(ParseError):
        run_suite("no-such-suite")
    with pytest.raises(ResourceLimitError):
        run_suite("windmill")
    with pytest.raises(ResourceLimitError):
        run_suite("pretzel-5")


def test_suite_report(seed):
    report = run_suite("closed-surfaces", seed)
    assert report.passed
    assert report.seed == seed
    assert [c.name for c in report.cases] == ["closed genus 0", "closed genus 1", "closed genus 2"]


def test_failing_case_is_recorded(monkeypatch):
    def broken(rng):
        def check():
            raise KJClassError("boom")
        return [("broken", check)]

    monkeypatch.setitem(kjinvariants.SUITES, "broken", (broken, None))
    report = run_suite("broken")
    assert not report.passed
    assert report.cases[0].detail == "KJClassError: boom"


DISKS = {
    "birth": [birth()],
    "two births merged": [birth(), birth(), saddle(1, 2)],
    "split then death": [birth(), saddle(1, 1), death(2)],
}


def disk_movie(name, kink=False):
    rec = Recorder()
    for ev in DISKS[name]:
        rec.do(ev)
    if kink:
        rec.do(r1_add(rec.frame.edges[0], 1, "R"))
    return rec.movie(name, 1)


@pytest.mark.parametrize("name", ["two births merged", "split then death"])
def test_isotopic_disks_give_homologous_cycles(name):
    report = distinguish_slices(disk_movie("birth"), disk_movie(name))
    assert not report.distinguished
    assert report.difference.is_boundary or report.sum.is_boundary


@pytest.mark.parametrize("name", ["two births merged", "split then death"])
def test_same_extension_of_unknotted_disks(name):
    # unknotted disks stay indistinguishable once capped by the same kink
    report = distinguish_slices(disk_movie("birth", kink=True), disk_movie(name, kink=True))
    assert not report.distinguished
    assert report.difference.is_boundary or report.sum.is_boundary


def test_report_without_verdicts():
    c = kj_cycle(load_movie("disk"))
    with pytest.raises(KJClassError):
        DistinctionReport((c, c), None, None).to_model()
