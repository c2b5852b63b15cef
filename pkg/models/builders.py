"""Generated diagrams and the movies that fill them.

Movies onto a given diagram are built backwards: the diagram is reduced to the
empty one by removal events, then the inverse events are replayed from the
empty diagram, matching every replayed frame to the recorded one by
isomorphism. The replay ends with an isotopy onto the exact target numbering.
"""
import os
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from models import config
from models.cobordism import Movie
from models.config import get_logger, read_fixture_file
from models.diagram import EMPTY, Crossing, Endpoint, OrientedDiagram, parse_pd
from models.errors import IllegalEventError, KJClassError, ParseError
from models.events import (
    KINK_PORTS,
    MovieEvent,
    Step,
    apply_event,
    birth,
    death,
    finger_variant,
    isotopy,
    r1_add,
    r1_remove,
    r2_add,
    r2_remove,
    saddle,
)
from models.rewrite import DiagramEditor, find_isomorphism

logger = get_logger(__name__)

SAIL = (3, -3, 3)
CCW = ("NE", "NW", "SW", "SE")
Band = Tuple[Endpoint, Endpoint]


class Recorder:
    """Applies events one at a time from an initial frame."""

    def __init__(self, initial: OrientedDiagram = EMPTY):
        self.initial = initial
        self.frame = initial
        self.events: List[MovieEvent] = []
        self.steps: List[Step] = []

    def do(self, ev: MovieEvent) -> Step:
        step = apply_event(self.frame, ev, len(self.events))
        self.events.append(ev)
        self.steps.append(step)
        self.frame = step.after
        return step

    def movie(self, name: str = "", components: Optional[int] = None) -> Movie:
        logger.info("built movie %r with %d events", name, len(self.events))
        return Movie(self.initial, list(self.events), name, components, steps=list(self.steps))


@dataclass
class _Removal:
    before: OrientedDiagram
    after: OrientedDiagram
    inverse: MovieEvent


def _inverse(before: OrientedDiagram, ev: MovieEvent, step: Step) -> MovieEvent:
    if ev.kind == "death":
        return birth()
    if ev.kind == "saddle":
        if ev.pairing != "0":
            raise KJClassError("only coherent bands can be replayed backwards")
        return saddle(*step.info["arcs"])
    if ev.kind == "r1_remove":
        return r1_add(step.info["edge"], ev.sign, ev.side)
    if ev.kind == "r2_remove":
        over, under = step.info["over"], step.info["under"]
        if over == under:
            raise IllegalEventError("R2 removal leaves over and under strands on one edge")
        side, parallel = finger_variant(before, *ev.edges)
        return r2_add(over, under, side, parallel)
    raise KJClassError(f"{ev.kind} has no inverse in a reduction")


class Reduction:
    """Removal events from a diagram down to the empty one, kept for replay.

    `track` follows every edge of the starting diagram to its current id.
    """

    def __init__(self, d: OrientedDiagram):
        self.target = d
        self.frame = d
        self.log: List[_Removal] = []
        self.track: Dict[int, int] = {e: e for e in d.edges}

    def apply(self, ev: MovieEvent) -> Step:
        step = apply_event(self.frame, ev, len(self.log))
        self.log.append(_Removal(self.frame, step.after, _inverse(self.frame, ev, step)))
        images = step.info["edges"]
        self.track = {e: images[cur] for e, cur in self.track.items() if cur in images}
        self.frame = step.after
        return step

    def movie(self, name: str = "", components: Optional[int] = 1) -> Movie:
        if not self.frame.is_empty():
            raise KJClassError(f"reduction of {name!r} stopped at {self.frame}")
        rec = Recorder(EMPTY)
        phi: Dict[int, int] = {}
        for removal in reversed(self.log):
            rec.do(replace(removal.inverse, edges=tuple(phi[e] for e in removal.inverse.edges)))
            found = find_isomorphism(removal.before, rec.frame)
            if found is None:
                raise KJClassError(f"replayed frame {rec.frame} does not match {removal.before}")
            phi = found[1]
        if (rec.frame.crossings, rec.frame.loops) != (self.target.crossings, self.target.loops):
            rec.do(isotopy(self.target.to_pd(), self.target))
        return rec.movie(name, components)


def find_kink(d: OrientedDiagram, at: Optional[int] = None) -> Optional[MovieEvent]:
    for e, ((i, p), (j, q)) in sorted(d.endpoints().items()):
        if i != j or (at is not None and i != at):
            continue
        pattern = KINK_PORTS.get(frozenset((p, q)))
        if pattern and pattern[0] == d.crossings[i].sign:
            return r1_remove(e, *pattern)
    return None


def find_bigon(d: OrientedDiagram, at: Optional[Tuple[int, int]] = None) -> Optional[MovieEvent]:
    ends = d.endpoints()
    for over, ((i, p), (j, q)) in sorted(ends.items()):
        if i == j or p not in (1, 3) or q not in (1, 3):
            continue
        if at is not None and {i, j} != set(at):
            continue
        for under, ((k, r), (l, s)) in sorted(ends.items()):
            if {k, l} != {i, j} or r not in (0, 2) or s not in (0, 2):
                continue
            ev = r2_remove(over, under)
            try:
                step = apply_event(d, ev)
            except IllegalEventError:
                continue
            if step.info["over"] != step.info["under"]:
                return ev
    return None


def simplify(red: Reduction):
    """Greedy R1 then R2 removals down to crossingless loops, then their deaths."""
    while red.frame.n:
        ev = find_kink(red.frame) or find_bigon(red.frame)
        if ev is None:
            raise KJClassError(f"no R1 or R2 simplification applies to {red.frame}")
        red.apply(ev)
    while red.frame.loops:
        red.apply(death(red.frame.loops[-1]))


def unknotting_movie(d: OrientedDiagram, name: str = "") -> Movie:
    red = Reduction(d)
    simplify(red)
    return red.movie(name or f"filling of {d}", components=len(d.components))


def ribbon_movie(d: OrientedDiagram, bands: Sequence[Band], name: str = "") -> Movie:
    """Band moves at the given (crossing, port) pairs, then an R1/R2 undo to the unlink."""
    red = Reduction(d)
    for (i, p), (j, q) in bands:
        red.apply(saddle(red.frame.edge_at(i, p), red.frame.edge_at(j, q)))
    simplify(red)
    return red.movie(name or f"ribbon filling of {d}")


def braid_closure(word: Sequence[int], strands: Optional[int] = None) -> OrientedDiagram:
    """Closure of a braid word; letter i is σ_i, -i its inverse.

    Strands run bottom to top and close to the right, so the Seifert circle of
    position 1 is outermost.
    """
    m = strands or max((abs(s) for s in word), default=0) + 1
    if any(s == 0 or abs(s) >= m for s in word):
        raise ParseError(f"braid letters must lie in 1..{m - 1}")
    current = list(range(1, m + 1))
    next_id = m + 1
    raw = []
    for s in word:
        i = abs(s) - 1
        bl, br = current[i], current[i + 1]
        tl, tr = next_id, next_id + 1
        next_id += 2
        raw.append(((br, tr, tl, bl), 1) if s > 0 else ((bl, br, tr, tl), -1))
        current[i], current[i + 1] = tl, tr
    glue = {e: p + 1 for p, e in enumerate(current)}
    crossings = tuple(Crossing(tuple(glue.get(e, e) for e in ports), sign) for ports, sign in raw)
    loops = tuple(p + 1 for p, e in enumerate(current) if e == p + 1)
    nesting = tuple((k, k + 1) for k in range(m - 1))
    return DiagramEditor(OrientedDiagram(crossings, loops)).freeze(nesting)[0]


def pretzel_layout(params: Sequence[int]) -> Tuple[OrientedDiagram, Dict[Tuple[int, str], int]]:
    """Pretzel diagram with a compass: (crossing, "NE"/"NW"/"SW"/"SE") -> PD port.

    Columns are enumerated left to right, crossings top to bottom. A negative
    parameter twists with the NW-SE strand over, which makes its crossings
    positive in the single-component orientation.
    """
    if len(params) % 2 == 0 or any(p % 2 == 0 for p in params):
        raise ParseError("pretzel diagrams here need an odd number of odd parameters")
    offsets = [sum(abs(p) for p in params[:c]) for c in range(len(params))]
    visits = []
    for rnd in (0, 1):
        for col, p in enumerate(params):
            down = (col % 2 == 0) == (rnd == 0)
            for k in (range(abs(p)) if down else reversed(range(abs(p)))):
                if down:
                    names = ("NW", "SE") if k % 2 == 0 else ("NE", "SW")
                else:
                    names = ("SW", "NE") if k % 2 == 0 else ("SE", "NW")
                visits.append((offsets[col] + k, *names))
    total = len(visits)
    slots = {}
    for j, (c, entry, leave) in enumerate(visits):
        slots[(c, entry)] = j + 1
        slots[(c, leave)] = (j + 1) % total + 1
    crossings, compass = [], {}
    for col, p in enumerate(params):
        for k in range(abs(p)):
            c = offsets[col] + k
            if p < 0:
                start = "SW" if k % 2 == 0 else "NE"
            else:
                start = "NW" if k % 2 == 0 else "SE"
            r = CCW.index(start)
            names = [CCW[(r + t) % 4] for t in range(4)]
            crossings.append(Crossing(tuple(slots[(c, nm)] for nm in names), 1 if p < 0 else -1))
            compass.update({(c, nm): t for t, nm in enumerate(names)})
    return OrientedDiagram(tuple(crossings), (), ()), compass


def pretzel(params: Sequence[int]) -> OrientedDiagram:
    return pretzel_layout(params)[0]


def _bottom_band(params: Sequence[int], compass, column: int, offset: int = 0) -> Band:
    c = sum(abs(p) for p in params[: column + 1]) - 1
    return (offset + c, compass[(c, "SE")]), (offset + c, compass[(c, "SW")])


def _column(side: str) -> int:
    if side not in ("L", "R"):
        raise ParseError(f"slice side must be L or R, got {side!r}")
    return 0 if side == "L" else 2


def windmill(k: int) -> OrientedDiagram:
    """Connected sum of k sails P(3,-3,3); sail i owns crossings 9i..9i+8."""
    if k < 1:
        raise ParseError("a windmill needs at least one sail")
    sail, _ = pretzel_layout(SAIL)
    size = len(sail.edges)
    crossings = tuple(
        Crossing(tuple(e + i * size for e in c.ports), c.sign) for i in range(k) for c in sail.crossings
    )
    d = OrientedDiagram(crossings)
    # outer top arc of one sail to the column 0/1 top arc of the next
    for i in range(k - 1):
        d = apply_event(d, saddle(1 + i * size, 13 + (i + 1) * size)).after
    return d


def _undo_slice(red: Reduction, n: int, column: int):
    """Undo the banded P(n,-n,n): the banded column unwinds by n kinks from its
    bottom crossing up, then the other two columns cancel in n bottom bigons."""
    first = column * n
    for k in reversed(range(first, first + n)):
        ev = find_kink(red.frame, at=k)
        if ev is None:
            raise KJClassError(f"crossing {k} of {red.frame} is not a kink")
        red.apply(ev)
    for m in reversed(range(1, n + 1)):
        ev = find_bigon(red.frame, at=(m - 1, 2 * m - 1))
        if ev is None:
            raise KJClassError(f"crossings {m - 1} and {2 * m - 1} of {red.frame} do not bound a bigon")
        red.apply(ev)
    while red.frame.loops:
        red.apply(death(red.frame.loops[-1]))


def pretzel_slice_movie(n: int, side: str) -> Movie:
    """Ribbon disk for P(n,-n,n): a band at the bottom of column 0 (L) or 2 (R)."""
    params = (n, -n, n)
    d, compass = pretzel_layout(params)
    column = _column(side)
    red = Reduction(d)
    (i, p), (j, q) = _bottom_band(params, compass, column)
    red.apply(saddle(d.edge_at(i, p), d.edge_at(j, q)))
    _undo_slice(red, n, column)
    return red.movie(f"P({n},{-n},{n}) {side}")


def windmill_slice_movie(k: int, sides: str) -> Movie:
    if len(sides) != k:
        raise ParseError(f"need one side per sail, got {sides!r} for {k} sails")
    d = windmill(k)
    _, compass = pretzel_layout(SAIL)
    bands = [_bottom_band(SAIL, compass, _column(s), offset=9 * i) for i, s in enumerate(sides)]
    return ribbon_movie(d, bands, name=f"windmill {sides}")


def unlink(n: int) -> OrientedDiagram:
    return OrientedDiagram((), tuple(range(1, n + 1)))


def _fill(rec: Recorder, n: int, genus: int) -> int:
    loop = rec.do(birth()).info["loop"]
    for _ in range(genus):
        a, b = rec.do(saddle(loop, loop)).info["arcs"]
        loop = rec.do(saddle(a, b)).info["arcs"][0]
    for _ in range(n - 1):
        loop = rec.do(saddle(loop, loop)).info["arcs"][0]
    return loop


def unlink_filling(n: int, genus: int = 0) -> Movie:
    """Connected surface of the given genus bounding the n-component unlink."""
    if n < 1 or genus < 0:
        raise ParseError("need n >= 1 and genus >= 0")
    rec = Recorder(EMPTY)
    _fill(rec, n, genus)
    return rec.movie(f"unlink {n} genus {genus}", components=1)


def closed_surface(genus: int) -> Movie:
    rec = Recorder(EMPTY)
    loop = _fill(rec, 1, genus)
    rec.do(death(loop))
    return rec.movie(f"closed genus {genus}", components=1)


def load_diagram(name: str) -> OrientedDiagram:
    """Read fixtures/diagrams/<name>.pd."""
    path = config.fixture_path("diagrams", f"{name}.pd")
    if not os.path.exists(path):
        raise KJClassError(f"no fixture diagram {name!r} under {config.FIXTURES_DIR}")
    return parse_pd(read_fixture_file(path))


def _ints(kind: str, args: Sequence[str]) -> List[int]:
    try:
        return [int(a) for a in args]
    except ValueError:
        raise ParseError(f"{kind} needs integer arguments, got {' '.join(args)!r}")


MOVIE_BUILDERS = {
    "slice": (2, lambda args: pretzel_slice_movie(_ints("slice", args[:1])[0], args[1])),
    "windmill": (1, lambda args: windmill_slice_movie(len(args[0]), args[0])),
    "filling": (2, lambda args: unlink_filling(*_ints("filling", args))),
    "closed": (1, lambda args: closed_surface(*_ints("closed", args))),
}


def named_movie(kind: str, args: Sequence[str]) -> Movie:
    """Builder movie by name: slice N L|R, windmill SIDES, filling N GENUS, closed GENUS."""
    if kind not in MOVIE_BUILDERS:
        raise ParseError(f"unknown movie kind {kind!r}; choose from {', '.join(MOVIE_BUILDERS)}")
    arity, build = MOVIE_BUILDERS[kind]
    if len(args) != arity:
        raise ParseError(f"{kind} takes {arity} argument(s), got {len(args)}")
    return build(list(args))
