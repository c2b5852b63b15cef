import random
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import networkx as nx

from models import config
from models.builders import (
    Recorder,
    Reduction,
    braid_closure,
    closed_surface,
    find_bigon,
    load_diagram,
    pretzel,
    pretzel_slice_movie,
    unlink,
    unlink_filling,
    windmill_slice_movie,
)
from models.chaincomplex import (
    ONE,
    X,
    Bigrading,
    ChainElement,
    EnhancedState,
    KhovanovComplex,
    build_complex,
    grade,
    pqr_chain,
    transport,
)
from models.cobordism import UNIT, InducedMap, Movie, check_chain_map, event_map, induced_map, kj_cycle
from models.config import get_logger
from models.diagram import (
    OrientedDiagram,
    equal_up_to_renumbering,
    orientation_state,
    resolve,
    seifert_nesting,
    subgraph,
    trace_graph,
)
from models.errors import FrameMismatchError, KJClassError, ParseError, ResourceLimitError
from models.events import KINK_PORTS, Step, carry, death, r1_add, r1_remove, saddle
from models.homology import HomologyVerdict, classify, homology_groups, homology_table
from models.rewrite import smooth_crossing
from models.schemas import CaseResult, DistinctionReportModel, SuiteReport

logger = get_logger(__name__)

Trim = Tuple[int, str]
CapSpec = Union[None, int, Tuple[int, int]]


@dataclass
class SeifertPrediction:
    # first Betti number of each component of Γ₀, components ordered by least circle
    gamma0_betti: List[int]
    kind: str
    element: ChainElement
    components: List[List[int]] = field(default_factory=list)
    # (circle, sign) when Γ₀ is a single tree
    marked: List[Tuple[int, int]] = field(default_factory=list)


@dataclass
class DistinctionReport:
    cycles: Tuple[ChainElement, ChainElement]
    difference: Optional[HomologyVerdict]
    sum: Optional[HomologyVerdict]
    trims: List[Trim] = field(default_factory=list)
    trimmed_difference: Optional[HomologyVerdict] = None
    trimmed_sum: Optional[HomologyVerdict] = None
    trimmed_cycles: Optional[Tuple[ChainElement, ChainElement]] = None

    @property
    def distinguished(self) -> bool:
        untrimmed = self.difference is not None and self.sum is not None and \
            self.difference.nontrivial and self.sum.nontrivial
        trimmed = self.trimmed_difference is not None and self.trimmed_sum is not None and \
            self.trimmed_difference.nontrivial and self.trimmed_sum.nontrivial
        return untrimmed or trimmed

    @property
    def conclusion(self) -> str:
        return "distinguished" if self.distinguished else "not distinguished"

    def to_model(self) -> DistinctionReportModel:
        trimmed = {}
        if self.trimmed_difference is not None:
            trimmed = {"trimmed_difference": self.trimmed_difference.to_model(),
                       "trimmed_sum": self.trimmed_sum.to_model()}
        difference = self.difference or self.trimmed_difference
        total = self.sum or self.trimmed_sum
        if difference is None or total is None:
            raise KJClassError("distinction report has neither untrimmed nor trimmed verdicts")
        return DistinctionReportModel(
            conclusion=self.conclusion,
            difference=difference.to_model(),
            sum=total.to_model(),
            trims=self.trims,
            **trimmed,
        )


def _untwist(red: Reduction, k: int):
    """Replace crossing k by its oriented smoothing: a saddle that turns it into
    a kink, then the kink's removal. A crossing that already is a kink is removed
    directly, taking its loop circle with it."""
    x = red.frame.crossings[k]
    for ports, (sign, side) in KINK_PORTS.items():
        p, q = sorted(ports)
        if sign == x.sign and x.ports[p] == x.ports[q]:
            red.apply(r1_remove(x.ports[p], sign, side))
            return
    pa, pb, side = (2, 3, "L") if x.sign > 0 else (2, 1, "R")
    step = red.apply(saddle(x.ports[pa], x.ports[pb]))
    red.apply(r1_remove(step.info["arcs"][0], x.sign, side))


def seifert_movie(d: OrientedDiagram) -> Movie:
    """Seifert's algorithm as a movie: disks born outermost first, then one twist-and-glue
    per negative crossing, then one per positive crossing."""
    order = seifert_nesting(d)
    circles = resolve(d, orientation_state(d)).circles
    red = Reduction(d)
    alive = list(range(d.n))
    removal = [i for i in reversed(range(d.n)) if d.crossings[i].sign > 0]
    removal += [i for i in reversed(range(d.n)) if d.crossings[i].sign < 0]
    for i in removal:
        k = alive.index(i)
        _untwist(red, k)
        alive.pop(k)
    for c in reversed(order):
        loop = red.track.get(circles[c][0])
        if loop is not None:
            red.apply(death(loop))
    m = red.movie(f"seifert surface of {d}", components=1)
    logger.info("seifert movie: %d circles, %d crossings, χ=%d", len(circles), d.n, m.euler)
    return m


def gamma0(d: OrientedDiagram) -> nx.MultiGraph:
    """0-trace subgraph of the state graph of the orientation state."""
    return subgraph(trace_graph(d, orientation_state(d)), 0).graph


def predict_seifert_kj(d: OrientedDiagram) -> SeifertPrediction:
    s = orientation_state(d)
    g = gamma0(d)
    n_circles = g.number_of_nodes()
    components = sorted((sorted(c) for c in nx.connected_components(g)), key=min)
    bettis = [g.subgraph(c).number_of_edges() - len(c) + 1 for c in components]
    if any(b >= 2 for b in bettis):
        return SeifertPrediction(bettis, "zero", ChainElement.zero(), components)
    # x-labeled circle sets with their coefficients, multiplied component by component
    acc: Dict[FrozenSet[int], int] = {frozenset(): 1}
    marked: List[Tuple[int, int]] = []
    for comp, b in zip(components, bettis):
        if b == 0:
            dist = nx.single_source_shortest_path_length(g, comp[0])
            factor = {frozenset(comp) - {v}: (-1) ** (dist[v] % 2) for v in comp}
            marked += [(v, (-1) ** (dist[v] % 2)) for v in comp]
        else:
            factor = {frozenset(comp): 2}
        acc = {xs | ys: k * m for xs, k in acc.items() for ys, m in factor.items()}
    kind = "twice-all-x" if any(bettis) else "pqr-chain"
    if kind == "pqr-chain" and len(components) == 1:
        element = pqr_chain(d, s, marked)
    else:
        terms = {
            EnhancedState(s.bits, "".join(X if c in xs else ONE for c in range(n_circles))): k
            for xs, k in acc.items()
        }
        element = ChainElement(terms, grade(d, next(iter(terms))) if terms else None)
        marked = []
    logger.info("prediction for %s: %s (Γ₀ betti %s)", d, kind, bettis)
    return SeifertPrediction(bettis, kind, element, components, marked)


def verify_seifert_theorem(d: OrientedDiagram) -> Tuple[bool, Dict[str, object]]:
    prediction = predict_seifert_kj(d)
    cycle = kj_cycle(seifert_movie(d))
    ok = cycle.equal_up_to_sign(prediction.element)
    report = {
        "kind": prediction.kind,
        "gamma0_betti": prediction.gamma0_betti,
        "computed_terms": len(cycle),
        "predicted_terms": len(prediction.element),
        "agree": ok,
    }
    if not ok:
        logger.warning("seifert cycle of %s disagrees with the %s prediction", d, prediction.kind)
    return ok, report


def trim(d: OrientedDiagram, crossing: int, side: str = "L") -> Tuple[OrientedDiagram, InducedMap]:
    """Remove one crossing by a 1-handle and an R1 move.

    The map keeps generators that 0-smooth the crossing and kills the rest; the
    side only names which of the two equivalent bands was drawn.
    """
    if not 0 <= crossing < d.n:
        raise KJClassError(f"no crossing {crossing} in a {d.n}-crossing diagram")
    if side not in ("L", "R"):
        raise ParseError(f"trim side must be L or R, got {side!r}")
    after, origin, cmap = smooth_crossing(d, crossing, 0)
    images = {old: new for new, olds in origin.items() for old in olds}
    dh = d.n_minus - after.n_minus
    shift = dh + (after.n_plus - after.n_minus) - (d.n_plus - d.n_minus)

    def apply(g):
        if g.bits[crossing]:
            return {}
        bits = g.bits[:crossing] + g.bits[crossing + 1:]
        src, dst = resolve(d, g.bits), resolve(after, bits)
        lab = carry(src, g.labels, dst, images)
        return {EnhancedState(bits, "".join(lab[k] for k in range(len(dst)))): 1}

    step = Step(d, after, shift, apply, None, {"edges": images, "crossings": cmap, "trim": (crossing, side)})
    return after, InducedMap(d, after, [step])


def apply_trims(d: OrientedDiagram, schedule: Sequence[Trim]) -> Tuple[OrientedDiagram, Optional[InducedMap]]:
    """Compose trims named by crossing indices of d."""
    alive = list(range(d.n))
    current, f = d, None
    for crossing, side in schedule:
        if crossing not in alive:
            raise KJClassError(f"crossing {crossing} is unknown or already trimmed")
        current, g = trim(current, alive.index(crossing), side)
        alive.remove(crossing)
        f = g if f is None else f.then(g)
    return current, f


def extreme_grading_precheck(c: KhovanovComplex, e: ChainElement) -> Optional[bool]:
    """Whether e is a boundary when that needs no linear algebra, else None."""
    if e.is_zero():
        return True
    h, q = e.bigrading
    if c.rank(h - 1, q) == 0:
        return False
    return None


def _classify(c: KhovanovComplex, e: ChainElement) -> HomologyVerdict:
    verdict = classify(c, e)
    quick = extreme_grading_precheck(c, e)
    if quick is not None and verdict.is_cycle and quick != verdict.is_boundary:
        raise KJClassError(f"precheck and classification disagree on {e}")
    return verdict


def slice_obstruction(d: OrientedDiagram) -> Tuple[str, HomologyVerdict]:
    if len(d.components) != 1:
        raise KJClassError("slice obstruction needs a knot diagram")
    m = seifert_movie(d)
    cycle = kj_cycle(m)
    verdict = _classify(build_complex(d), cycle)
    result = "obstructed" if (m.genus is not None and m.genus <= 1 and not verdict.nontrivial) else "inconclusive"
    logger.info("slice obstruction for %s: genus %s, %s", d, m.genus, result)
    return result, verdict


def _common_frame(m0: Movie, m1: Movie, c1: ChainElement) -> ChainElement:
    if (m0.final.crossings, m0.final.loops) == (m1.final.crossings, m1.final.loops):
        return c1
    if equal_up_to_renumbering(m1.final, m0.final) is None:
        raise FrameMismatchError(f"movies end at different diagrams: {m0.final} and {m1.final}", len(m1.events))
    return transport(c1, m1.final, m0.final)


def distinguish_slices(m0: Movie, m1: Movie, trims: Optional[Sequence[Trim]] = None,
                       untrimmed: bool = True) -> DistinctionReport:
    d = m0.final
    c0 = kj_cycle(m0)
    c1 = _common_frame(m0, m1, kj_cycle(m1))
    report = DistinctionReport((c0, c1), None, None, list(trims or []))
    if untrimmed:
        c = build_complex(d)
        report.difference = _classify(c, c0 - c1)
        report.sum = _classify(c, c0 + c1)
    if trims:
        trimmed, f = apply_trims(d, trims)
        t0, t1 = f(c0), f(c1)
        c = build_complex(trimmed)
        report.trimmed_cycles = (t0, t1)
        report.trimmed_difference = _classify(c, t0 - t1)
        report.trimmed_sum = _classify(c, t0 + t1)
        if untrimmed and report.trimmed_difference.nontrivial and not report.difference.nontrivial:
            raise KJClassError("trimmed difference is nontrivial but the untrimmed one is a boundary")
    logger.info("%r vs %r: %s", m0.name, m1.name, report.conclusion)
    return report


def cap_movies(n: int, spec: CapSpec = None) -> Movie:
    """Caps for the n-component unlink: disks (None), a punctured torus on
    component j (j), or an annulus joining j and k (j, k); disks elsewhere."""
    rec = Recorder(unlink(n))
    name = "C"
    if isinstance(spec, int):
        if not 0 <= spec < n:
            raise KJClassError(f"no component {spec} in a {n}-component unlink")
        a, b = rec.do(saddle(spec + 1, spec + 1)).info["arcs"]
        rec.do(saddle(a, b))
        name = f"C_{spec}"
    elif spec is not None:
        j, k = spec
        if j == k or not (0 <= j < n and 0 <= k < n):
            raise KJClassError(f"cannot join components {j} and {k} of a {n}-component unlink")
        rec.do(saddle(j + 1, k + 1))
        name = f"C_{j},{k}"
    while rec.frame.loops:
        rec.do(death(rec.frame.loops[-1]))
    return rec.movie(name, components=None)


def evaluate_closed(f: InducedMap, e: ChainElement) -> int:
    """Coefficient of the empty generator in f(e)."""
    return f(e).terms.get(UNIT, 0)


def cap_pairings(cycle: ChainElement, n: int) -> Dict[str, int]:
    out = {"C": evaluate_closed(induced_map(cap_movies(n)), cycle)}
    for j in range(n):
        out[f"C_{j}"] = evaluate_closed(induced_map(cap_movies(n, j)), cycle)
    for j in range(n):
        for k in range(j + 1, n):
            out[f"C_{j},{k}"] = evaluate_closed(induced_map(cap_movies(n, (j, k))), cycle)
    return out


# theorem suites: each returns (case name, check) pairs; a check returns (passed, detail)
Check = Callable[[], Tuple[bool, str]]


def _unlink_cases(rng: random.Random) -> List[Tuple[str, Check]]:
    def case(n, genus):
        def check():
            m = unlink_filling(n, genus)
            cycle = kj_cycle(m)
            if genus == 0:
                expected = pqr_chain(m.final, (), [(j, 1) for j in range(n)])
            elif genus == 1:
                expected = 2 * ChainElement({EnhancedState((), X * n): 1})
            else:
                expected = ChainElement.zero()
            pairs = cap_pairings(cycle, n)
            ok = cycle.equal_up_to_sign(expected)
            if genus == 0:
                ok = ok and pairs["C"] == 0 and all(abs(v) == 2 for k, v in pairs.items() if k != "C")
            elif genus == 1:
                ok = ok and abs(pairs["C"]) == 2
            return ok, f"{len(cycle)} terms, pairings {pairs}"
        return check

    return [(f"unlink n={n} genus={g}", case(n, g)) for n in (1, 2, 3) for g in (0, 1, 2)]


def _closed_cases(rng: random.Random) -> List[Tuple[str, Check]]:
    def case(genus, expected):
        def check():
            value = evaluate_closed(induced_map(closed_surface(genus)), ChainElement({UNIT: 1}, Bigrading(0, 0)))
            return abs(value) == expected, f"1 -> {value}"
        return check

    return [(f"closed genus {g}", case(g, v)) for g, v in ((0, 0), (1, 2), (2, 0))]


SEIFERT_CORPUS = {
    "unknot": ("fixture", "unknot", "pqr-chain"),
    "unknot_kink": ("fixture", "unknot_kink", "pqr-chain"),
    "figure8": ("fixture", "figure8", "twice-all-x"),
    "trefoil": ("fixture", "trefoil", "zero"),
    "braid 1 2": ("braid", (1, 2), "pqr-chain"),
    "braid 1 1": ("braid", (1, 1), "twice-all-x"),
    "P(-3,-3,-3)": ("pretzel", (-3, -3, -3), "zero"),
    "P(-5,-3,-5)": ("pretzel", (-5, -3, -5), "zero"),
}


def corpus_diagram(source: str, arg) -> OrientedDiagram:
    if source == "fixture":
        return load_diagram(arg)
    if source == "braid":
        return braid_closure(arg)
    return pretzel(arg)


def _seifert_cases(rng: random.Random) -> List[Tuple[str, Check]]:
    def case(source, arg, kind):
        def check():
            d = corpus_diagram(source, arg)
            ok, report = verify_seifert_theorem(d)
            return ok and report["kind"] == kind, str(report)
        return check

    return [(name, case(*spec)) for name, spec in SEIFERT_CORPUS.items()]


def _pretzel_cases(rng: random.Random) -> List[Tuple[str, Check]]:
    def case(d_factory, expected):
        def check():
            result, verdict = slice_obstruction(d_factory())
            return result == expected, f"{result}: {verdict.certificate.get('kind')}"
        return check

    return [
        ("P(-3,-3,-3)", case(lambda: pretzel((-3, -3, -3)), "obstructed")),
        ("P(-5,-3,-5)", case(lambda: pretzel((-5, -3, -5)), "obstructed")),
        ("unknot", case(lambda: load_diagram("unknot"), "inconclusive")),
        ("figure8", case(lambda: load_diagram("figure8"), "inconclusive")),
    ]


def _same_homology(a: OrientedDiagram, b: OrientedDiagram) -> bool:
    return homology_table(homology_groups(build_complex(a))).equals(homology_table(homology_groups(build_complex(b))))


def _invariance_cases(rng: random.Random) -> List[Tuple[str, Check]]:
    cases = []
    for trial in range(8):
        word = [rng.choice((1, -1, 2, -2)) for _ in range(rng.randint(2, 4))]
        edge_pick, kink = rng.random(), (rng.choice((1, -1)), rng.choice("LR"))
        i, at = rng.choice((1, 2)), rng.randint(0, len(word))

        def r1_check(word=word, edge_pick=edge_pick, kink=kink):
            d = braid_closure(word, 3)
            edge = d.edges[int(edge_pick * len(d.edges))]
            f = event_map(d, r1_add(edge, *kink))
            check_chain_map(f)
            return _same_homology(d, f.target), f"word {word}, kink {kink} on edge {edge}"

        def r2_check(word=word, i=i, at=at):
            d = braid_closure(word, 3)
            d2 = braid_closure(word[:at] + [i, -i] + word[at:], 3)
            ev = find_bigon(d2)
            if ev is None:
                return False, "no bigon found"
            check_chain_map(event_map(d2, ev))
            return _same_homology(d, d2), f"word {word}, inserted {i},{-i} at {at}"

        cases += [(f"r1 trial {trial}", r1_check), (f"r2 trial {trial}", r2_check)]
    return cases


def _is_top_generator(e: ChainElement) -> bool:
    """A single ±1 term on the all-1 state with every circle labeled 1."""
    if len(e) != 1:
        return False
    ((g, c),) = e.terms.items()
    return abs(c) == 1 and all(g.bits) and all(label == ONE for label in g.labels)


def _slice_summands(n: int) -> int:
    # per bigon undone, one term becomes two summands and every other term three
    return (3 ** n + 1) // 2


def _slice_pair_cases(n: int, untrimmed: bool) -> List[Tuple[str, Check]]:
    schedule = [(k, "L") for k in range(n)]
    state = {}

    def movies():
        if "movies" not in state:
            state["movies"] = (pretzel_slice_movie(n, "L"), pretzel_slice_movie(n, "R"))
        return state["movies"]

    def structure():
        left, right = (kj_cycle(m) for m in movies())
        oriented = orientation_state(movies()[0].final).bits
        shared = {g.bits for g in left.terms} & {g.bits for g in right.terms}
        column_zero = sum(1 for g in right.terms if not any(g.bits[:n]))
        expected = _slice_summands(n)
        ok = len(left) == len(right) == expected and shared <= {oriented} and column_zero == 1
        return ok, (f"{len(left)} and {len(right)} summands (expected {expected}), "
                    f"{len(shared)} shared states, {column_zero} left-column-0 summands")

    def distinction():
        report = distinguish_slices(*movies(), trims=schedule, untrimmed=untrimmed)
        t_left, t_right = report.trimmed_cycles
        ok = report.distinguished and t_left.is_zero() and _is_top_generator(t_right)
        return ok, f"{report.conclusion}; trimmed images {t_left} and {t_right}"

    return [(f"P({n},{-n},{n}) cycle structure", structure), (f"P({n},{-n},{n}) distinction", distinction)]


def _windmill_cases(rng: random.Random) -> List[Tuple[str, Check]]:
    def check():
        m0, m1 = windmill_slice_movie(2, "LL"), windmill_slice_movie(2, "LR")
        schedule = [(6, "R"), (7, "R"), (8, "R"), (9, "L"), (10, "L"), (11, "L")]
        report = distinguish_slices(m0, m1, trims=schedule, untrimmed=False)
        t0, t1 = report.trimmed_cycles
        return report.distinguished and t0.is_zero() and _is_top_generator(t1), f"{report.conclusion}; {t1}"

    return [("windmill LL vs LR", check)]


SUITES: Dict[str, Tuple[Callable[[random.Random], List[Tuple[str, Check]]], Optional[str]]] = {
    "unlink-thm": (_unlink_cases, None),
    "closed-surfaces": (_closed_cases, None),
    "seifert-thm": (_seifert_cases, None),
    "pretzel-slice": (_pretzel_cases, None),
    "invariance": (_invariance_cases, None),
    "slices-946": (lambda rng: _slice_pair_cases(3, untrimmed=True), None),
    "pretzel-5": (lambda rng: _slice_pair_cases(5, untrimmed=False), "slow"),
    "windmill": (_windmill_cases, "large"),
}


def run_suite(name: str, seed: Optional[int] = None, runslow: bool = False) -> SuiteReport:
    if name not in SUITES:
        raise ParseError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    build, gate = SUITES[name]
    if gate == "slow" and not (runslow or config.ALLOW_LARGE):
        raise ResourceLimitError(f"suite {name} is slow; pass --runslow")
    if gate == "large" and not config.ALLOW_LARGE:
        raise ResourceLimitError(f"suite {name} needs --allow-large")
    seed = config.DEFAULT_SEED if seed is None else seed
    report = SuiteReport(suite=name, seed=seed)
    for case_name, check in build(random.Random(seed)):
        try:
            passed, detail = check()
        except KJClassError as exc:
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        logger.info("suite %s, %s: %s", name, case_name, "pass" if passed else "FAIL")
        report.cases.append(CaseResult(name=case_name, passed=passed, detail=detail))
    report.passed = all(c.passed for c in report.cases)
    return report
