import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

from pydantic import ValidationError

from models.chaincomplex import (
    Bigrading,
    ChainElement,
    EnhancedState,
    KhovanovComplex,
    build_complex,
    differential_terms,
    grade,
)
from models.config import get_logger
from models.diagram import EMPTY, OrientedDiagram, equal_up_to_renumbering, parse_pd
from models.errors import FrameMismatchError, IllegalEventError, KJClassError, ParseError
from models.events import MovieEvent, Step, Terms, apply_event
from models.intlinalg import SparseIntMatrix
from models.schemas import MovieEventModel, MovieModel

logger = get_logger(__name__)

UNIT = EnhancedState((), "")


class InducedMap:
    """Composite of per-frame maps; shifts q by the sum of the step shifts."""

    def __init__(self, source: OrientedDiagram, target: OrientedDiagram, steps: Sequence[Step] = ()):
        self.source = source
        self.target = target
        self.steps = list(steps)

    @property
    def shift(self) -> int:
        return sum(s.shift for s in self.steps)

    def then(self, other: "InducedMap") -> "InducedMap":
        return InducedMap(self.source, other.target, self.steps + other.steps)

    def on_generator(self, g: EnhancedState) -> Terms:
        current: Terms = {g: 1}
        for step in self.steps:
            nxt: Terms = {}
            for h, c in current.items():
                for t, v in step.apply(h).items():
                    nxt[t] = nxt.get(t, 0) + c * v
            current = {t: v for t, v in nxt.items() if v}
            if not current:
                break
        return current

    def __call__(self, e: ChainElement) -> ChainElement:
        out: Terms = {}
        for g, c in e.terms.items():
            for t, v in self.on_generator(g).items():
                out[t] = out.get(t, 0) + c * v
        result = ChainElement(out, Bigrading(e.bigrading.h, e.bigrading.q + self.shift) if e.bigrading else None)
        if result.terms:
            result.bigrading = grade(self.target, next(iter(result.terms)))
        return result

    def matrix(self, source: KhovanovComplex, target: KhovanovComplex, h: int, q: int) -> SparseIntMatrix:
        cols = source.generators(h, q)
        rows = target.index(h, q + self.shift)
        entries = {}
        for j, g in enumerate(cols):
            for t, v in self.on_generator(g).items():
                if t not in rows:
                    raise KJClassError(f"{g} maps to {t} outside bigrading ({h}, {q + self.shift})")
                entries[(rows[t], j)] = v
        return SparseIntMatrix(len(rows), len(cols), entries)


def check_chain_map(f: InducedMap):
    """Raise unless d∘f = f∘d, compared as matrices in every bigrading of the source."""
    source, target = build_complex(f.source), build_complex(f.target)
    for h, q in source.bigradings():
        if not source.rank(h, q):
            continue
        left = target.matrix(h, q + f.shift) @ f.matrix(source, target, h, q)
        right = f.matrix(source, target, h + 1, q) @ source.matrix(h, q)
        if left != right:
            j = min(j for (_, j), _ in set(left.entries.items()) ^ set(right.entries.items()))
            g = source.generators(h, q)[j]
            raise KJClassError(f"chain map identity fails on {g} at ({h}, {q})")


@dataclass
class Movie:
    initial: OrientedDiagram
    events: List[MovieEvent]
    name: str = ""
    components: Optional[int] = None
    declared_euler: Optional[int] = None
    expect_pd: Dict[int, str] = field(default_factory=dict)
    steps: List[Step] = field(default_factory=list, repr=False)

    @property
    def frames(self) -> List[OrientedDiagram]:
        return [self.initial] + [s.after for s in self.steps]

    @property
    def final(self) -> OrientedDiagram:
        return self.steps[-1].after if self.steps else self.initial

    @property
    def euler(self) -> int:
        return sum(1 if e.kind in ("birth", "death") else -1 if e.kind == "saddle" else 0 for e in self.events)

    @property
    def genus(self) -> Optional[int]:
        """Genus of a surface bounding the final frame, from χ = 2c − 2g − #boundary."""
        if not self.initial.is_empty():
            return None
        twice = 2 * (self.components or 1) - self.euler - len(self.final.components)
        if twice < 0 or twice % 2:
            return None
        return twice // 2


def build_movie(initial: OrientedDiagram, events: Sequence[MovieEvent], name: str = "",
                components: Optional[int] = None, declared_euler: Optional[int] = None,
                expect_pd: Optional[Dict[int, str]] = None) -> Movie:
    m = Movie(initial, list(events), name, components, declared_euler, dict(expect_pd or {}))
    frame = initial
    for k, ev in enumerate(m.events):
        step = apply_event(frame, ev, k)
        m.steps.append(step)
        frame = step.after
    for k, text in sorted(m.expect_pd.items()):
        if not 0 <= k <= len(m.steps):
            raise FrameMismatchError(f"no frame {k}", k)
        if equal_up_to_renumbering(m.frames[k], parse_pd(text)) is None:
            raise FrameMismatchError(f"expected {text}, found {m.frames[k]}", k)
    if declared_euler is not None and declared_euler != m.euler:
        raise IllegalEventError(f"declared Euler characteristic {declared_euler}, movie has {m.euler}")
    if initial.is_empty() and len(m.final.components) == 1 and m.genus is None:
        raise IllegalEventError(f"Euler characteristic {m.euler} gives no integral genus")
    logger.info("movie %r: %d events, χ=%d", name, len(m.events), m.euler)
    return m


def event_from_model(model: MovieEventModel) -> MovieEvent:
    sign = -1 if model.sign == "-" else 1
    side = model.side or "L"
    if model.type in ("r1", "r2") and model.dir is None:
        raise ParseError(f"{model.type} event needs a dir")
    if model.type == "death" and model.circle is None:
        raise ParseError("death event needs a circle")
    try:
        if model.type in ("birth", "r3"):
            return MovieEvent(model.type)
        if model.type == "death":
            return MovieEvent("death", (model.circle,))
        if model.type == "saddle":
            a, b = model.edges
            return MovieEvent("saddle", (a, b), pairing=model.pairing)
        if model.type == "r1":
            return MovieEvent(f"r1_{model.dir}", (model.edge,), sign=sign, side=side)
        if model.type == "r2":
            return MovieEvent(f"r2_{model.dir}", (model.over, model.under), side=side, parallel=model.parallel)
        if model.type == "isotopy":
            parse_pd(model.pd)
            return MovieEvent("isotopy", pd=model.pd)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"incomplete {model.type} event: {exc}")
    raise ParseError(f"unknown event type {model.type!r}")


def event_to_model(ev: MovieEvent) -> MovieEventModel:
    kind, _, direction = ev.kind.partition("_")
    sign = "+" if ev.sign > 0 else "-"
    if ev.kind == "death":
        return MovieEventModel(type="death", circle=ev.edges[0])
    if ev.kind == "saddle":
        return MovieEventModel(type="saddle", edges=list(ev.edges), pairing=ev.pairing)
    if kind == "r1":
        return MovieEventModel(type="r1", dir=direction, sign=sign, edge=ev.edges[0], side=ev.side)
    if kind == "r2":
        over, under = ev.edges
        if direction == "remove":
            return MovieEventModel(type="r2", dir="remove", over=over, under=under)
        return MovieEventModel(type="r2", dir="add", over=over, under=under, side=ev.side, parallel=ev.parallel)
    if ev.kind == "isotopy":
        return MovieEventModel(type="isotopy", pd=ev.pd)
    return MovieEventModel(type=ev.kind)


def validate_movie(raw: Union[str, dict, MovieModel]) -> Movie:
    try:
        if isinstance(raw, MovieModel):
            model = raw
        elif isinstance(raw, dict):
            model = MovieModel.model_validate(raw)
        else:
            model = MovieModel.model_validate_json(raw)
    except ValidationError as exc:
        raise ParseError(f"invalid movie file: {exc.errors()[0]['msg']}", location=str(exc.errors()[0]["loc"]))
    initial = EMPTY if model.initial.strip() == "empty" else parse_pd(model.initial)
    events = [event_from_model(e) for e in model.events]
    return build_movie(initial, events, model.name, model.components, model.euler, model.expect_pd)


def movie_to_json(m: Movie) -> str:
    model = MovieModel(
        name=m.name,
        initial="empty" if m.initial.is_empty() else m.initial.to_pd(),
        components=m.components,
        euler=m.declared_euler,
        events=[event_to_model(e) for e in m.events],
        expect_pd=m.expect_pd,
    )
    return json.dumps(model.model_dump(exclude_none=True, exclude_defaults=True), indent=2)


def movie_from_json(text: str) -> Movie:
    return validate_movie(text)


def event_map(before: OrientedDiagram, ev: MovieEvent) -> InducedMap:
    step = apply_event(before, ev)
    return InducedMap(before, step.after, [step])


def induced_map(m: Movie) -> InducedMap:
    return InducedMap(m.initial, m.final, m.steps)


def kj_cycle(m: Movie) -> ChainElement:
    if not m.initial.is_empty():
        raise KJClassError("the Khovanov-Jacobsson cycle needs a movie starting at the empty diagram")
    f = induced_map(m)
    cycle = f(ChainElement({UNIT: 1}, Bigrading(0, 0)))
    if not cycle.is_zero():
        boundary: Terms = {}
        for g, c in cycle.terms.items():
            for t, v in differential_terms(m.final, g).items():
                boundary[t] = boundary.get(t, 0) + c * v
        if any(boundary.values()):
            raise KJClassError(f"movie {m.name!r} produced a chain that is not a cycle")
    logger.info("kj cycle of %r: %d terms at %s", m.name, len(cycle), cycle.bigrading)
    return cycle
