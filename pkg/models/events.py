from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

from models.chaincomplex import ONE, X, EnhancedState, flip_map, multiply
from models.config import get_logger
from models.diagram import SMOOTHING, OrientedDiagram, Resolution, parse_pd, resolve
from models.errors import IllegalEventError, UnsupportedEventError
from models.rewrite import DiagramEditor, find_isomorphism

logger = get_logger(__name__)

Terms = Dict[EnhancedState, int]

KINDS = ("birth", "death", "saddle", "r1_add", "r1_remove", "r2_add", "r2_remove", "isotopy", "r3")

# (sign, side) -> roles of X(a, b, c, d); e1 runs into the kink, e2 is the loop, e3 runs out
KINKS = {
    (1, "L"): ("e1", "e3", "e2", "e2"),
    (1, "R"): ("e2", "e2", "e3", "e1"),
    (-1, "R"): ("e1", "e2", "e2", "e3"),
    (-1, "L"): ("e2", "e1", "e3", "e2"),
}
KINK_PORTS = {
    frozenset((2, 3)): (1, "L"),
    frozenset((0, 1)): (1, "R"),
    frozenset((1, 2)): (-1, "R"),
    frozenset((0, 3)): (-1, "L"),
}

# (side, parallel) -> (low ports, low sign, high ports, high sign); low is met first along `under`
FINGERS = {
    ("L", True): (("u1", "o2", "u2", "o1"), 1, ("u2", "o2", "u3", "o3"), -1),
    ("L", False): (("u1", "o2", "u2", "o3"), -1, ("u2", "o2", "u3", "o1"), 1),
    ("R", True): (("u1", "o1", "u2", "o2"), -1, ("u2", "o3", "u3", "o2"), 1),
    ("R", False): (("u1", "o3", "u2", "o2"), 1, ("u2", "o1", "u3", "o2"), -1),
}


@dataclass(frozen=True)
class MovieEvent:
    kind: str
    # death: (loop,); saddle: (a, b); r1: (edge,) or (loop,); r2: (over, under)
    edges: Tuple[int, ...] = ()
    pairing: str = "0"
    sign: int = 1
    side: str = "L"
    parallel: bool = True
    pd: Optional[str] = None
    # isotopy target as built; PD text cannot fix the signs of a component that never passes under
    target: Optional[OrientedDiagram] = field(default=None, compare=False, repr=False)

    @property
    def shift(self) -> int:
        return {"birth": 1, "death": 1, "saddle": -1}.get(self.kind, 0)

    def __str__(self):
        extra = {
            "saddle": f"{self.edges} pairing {self.pairing}",
            "r1_add": f"{self.edges} {'+' if self.sign > 0 else '-'}{self.side}",
            "r1_remove": f"{self.edges} {'+' if self.sign > 0 else '-'}{self.side}",
            "r2_add": f"over/under {self.edges} {self.side}{'' if self.parallel else ' anti'}",
        }.get(self.kind, str(self.edges) if self.edges else "")
        return f"{self.kind} {extra}".strip()


def birth() -> MovieEvent:
    return MovieEvent("birth")


def death(loop: int) -> MovieEvent:
    return MovieEvent("death", (loop,))


def saddle(a: int, b: int, pairing: str = "0") -> MovieEvent:
    return MovieEvent("saddle", (a, b), pairing=pairing)


def r1_add(edge: int, sign: int, side: str) -> MovieEvent:
    return MovieEvent("r1_add", (edge,), sign=sign, side=side)


def r1_remove(loop: int, sign: int, side: str) -> MovieEvent:
    return MovieEvent("r1_remove", (loop,), sign=sign, side=side)


def r2_add(over: int, under: int, side: str = "L", parallel: bool = True) -> MovieEvent:
    return MovieEvent("r2_add", (over, under), side=side, parallel=parallel)


def r2_remove(over: int, under: int) -> MovieEvent:
    return MovieEvent("r2_remove", (over, under))


def isotopy(pd: str, target: Optional[OrientedDiagram] = None) -> MovieEvent:
    return MovieEvent("isotopy", pd=pd, target=target)


@dataclass
class Step:
    """One frame transition with its induced map on generators."""

    before: OrientedDiagram
    after: OrientedDiagram
    shift: int
    apply: Callable[[EnhancedState], Terms]
    event: Optional[MovieEvent] = None
    # ids in the after frame: new loops, arcs, crossings; "edges" maps every before edge
    info: Dict[str, object] = field(default_factory=dict)


def _labels(res: Resolution, assignment: Dict[int, str]) -> str:
    return "".join(assignment[k] for k in range(len(res)))


def carry(
    src: Resolution,
    labels: str,
    dst: Resolution,
    images: Dict[int, int],
    skip: Iterable[int] = (),
    avoid: Iterable[int] = (),
) -> Dict[int, str]:
    """Move labels circle by circle, locating each circle by its first edge outside `avoid`."""
    skip, avoid = set(skip), set(avoid)
    out = {}
    for k, circle in enumerate(src.circles):
        if k in skip:
            continue
        e = next(e for e in circle if e not in avoid)
        out[dst.circle_of[images[e]]] = labels[k]
    return out


def reorder_sign(bits: Sequence[int], moved: Iterable[int]) -> int:
    """Sign of moving the crossings `moved` to the end of the enumeration."""
    moved = sorted(moved)
    skip = set(moved)
    count = 0
    for m in moved:
        if bits[m]:
            count += sum(1 for j in range(m + 1, len(bits)) if j not in skip and bits[j])
    return -1 if count % 2 else 1


def bigon_state(d: OrientedDiagram, k1: int, k2: int, over: int, under: int) -> Tuple[int, int]:
    """Local state at (k1, k2) whose smoothings join `over` to `under` at both crossings."""
    out = []
    for k in (k1, k2):
        ports = d.crossings[k].ports
        p, r = ports.index(over), ports.index(under)
        out.append(0 if SMOOTHING[0][r] == p else 1)
    return tuple(out)


def _require_edges(d: OrientedDiagram, edges: Iterable[int]):
    for e in edges:
        if e not in d.edges:
            raise IllegalEventError(f"no edge {e} in the frame")


def _images(before: OrientedDiagram, renum: Dict[int, int], absorbed: Dict[int, int]) -> Dict[int, int]:
    out = {}
    for e in before.edges:
        keep = e
        while keep in absorbed:
            keep = absorbed[keep]
        out[e] = renum[keep]
    return out


def _absorbed(chains: Dict[int, list]) -> Dict[int, int]:
    return {m: keep for keep, members in chains.items() for m in members if m != keep}


def _birth(before: OrientedDiagram, ev: MovieEvent) -> Step:
    ed = DiagramEditor(before)
    new = ed.new_edge()
    ed.loops.append(new)
    after, renum, _ = ed.freeze()
    images = _images(before, renum, {})
    loop = renum[new]

    def apply(g):
        src, dst = resolve(before, g.bits), resolve(after, g.bits)
        lab = carry(src, g.labels, dst, images)
        lab[dst.circle_of[loop]] = ONE
        return {EnhancedState(g.bits, _labels(dst, lab)): 1}

    return Step(before, after, 1, apply, ev, {"loop": loop, "edges": images})


def _death(before: OrientedDiagram, ev: MovieEvent) -> Step:
    (loop,) = ev.edges
    if loop not in before.loops:
        raise IllegalEventError(f"edge {loop} is not a crossingless loop")
    ed = DiagramEditor(before)
    ed.loops.remove(loop)
    after, renum, _ = ed.freeze()
    images = {e: renum[e] for e in before.edges if e != loop}

    def apply(g):
        src, dst = resolve(before, g.bits), resolve(after, g.bits)
        c = src.circle_of[loop]
        if g.labels[c] == ONE:
            return {}
        lab = carry(src, g.labels, dst, images, skip=(c,))
        return {EnhancedState(g.bits, _labels(dst, lab)): 1}

    return Step(before, after, 1, apply, ev, {"edges": images})


def _head_swap(ed: DiagramEditor, a: int, b: int) -> Tuple[Tuple[int, int], Dict[int, int]]:
    a_loop, b_loop = a in ed.loops, b in ed.loops
    if a == b:
        new = ed.new_edge()
        ed.loops.append(new)
        return (a, new), {}
    if a_loop and b_loop:
        ed.loops.remove(b)
        return (a, a), {b: a}
    if a_loop:
        ed.loops.remove(a)
        return (b, b), {a: b}
    if b_loop:
        ed.loops.remove(b)
        return (a, a), {b: a}
    ha, hb = ed.head(a), ed.head(b)
    ed.set_port(ha, b)
    ed.set_port(hb, a)
    return (a, b), {}


def _saddle(before: OrientedDiagram, ev: MovieEvent) -> Step:
    a, b = ev.edges
    _require_edges(before, (a, b))
    ed = DiagramEditor(before)
    if ev.pairing == "1":
        if a == b or before.component_of(a) == before.component_of(b):
            raise IllegalEventError("an incoherent band must join two different components")
        comp = set(before.components[before.component_of(b)])
        for c in before.crossings:
            if (c.ports[0] in comp) != (c.ports[1] in comp):
                raise IllegalEventError("reversing the second component would change a crossing sign")
        ed.reverse(comp)
    arcs, absorbed = _head_swap(ed, a, b)
    after, renum, _ = ed.freeze()
    images = _images(before, renum, absorbed)
    ra, rb = renum[arcs[0]], renum[arcs[1]]

    def apply(g):
        src, dst = resolve(before, g.bits), resolve(after, g.bits)
        A, B = src.circle_of[a], src.circle_of[b]
        A2, B2 = dst.circle_of[ra], dst.circle_of[rb]
        lab = carry(src, g.labels, dst, images, skip=(A, B))
        if A != B:
            product = multiply(g.labels[A], g.labels[B])
            if product is None:
                return {}
            lab[A2] = product
            return {EnhancedState(g.bits, _labels(dst, lab)): 1}
        if A2 == B2:
            return {}
        if g.labels[A] == X:
            lab[A2], lab[B2] = X, X
            return {EnhancedState(g.bits, _labels(dst, lab)): 1}
        out = {}
        for la, lb in ((ONE, X), (X, ONE)):
            lab[A2], lab[B2] = la, lb
            out[EnhancedState(g.bits, _labels(dst, lab))] = 1
        return out

    return Step(before, after, -1, apply, ev, {"arcs": (ra, rb), "edges": images})


def _r1_add(before: OrientedDiagram, ev: MovieEvent) -> Step:
    (edge,) = ev.edges
    _require_edges(before, (edge,))
    if (ev.sign, ev.side) not in KINKS:
        raise IllegalEventError(f"unknown kink {ev.sign}{ev.side}")
    ed = DiagramEditor(before)
    e1, e2, e3 = ed.cut(edge, 2)
    roles = {"e1": e1, "e2": e2, "e3": e3}
    k = ed.add_crossing([roles[r] for r in KINKS[(ev.sign, ev.side)]], ev.sign)
    after, renum, cmap = ed.freeze()
    images = _images(before, renum, {})
    loop, big = renum[e2], renum[e1]
    bit = 0 if ev.sign > 0 else 1

    def apply(g):
        src = resolve(before, g.bits)
        bits = g.bits + (bit,)
        dst = resolve(after, bits)
        lab = carry(src, g.labels, dst, images)
        c = dst.circle_of[loop]
        if ev.sign < 0:
            lab[c] = ONE
            return {EnhancedState(bits, _labels(dst, lab)): 1}
        A = dst.circle_of[big]
        lab[c] = X
        out = {EnhancedState(bits, _labels(dst, lab)): 1}
        if lab[A] == ONE:
            lab[A], lab[c] = X, ONE
            out[EnhancedState(bits, _labels(dst, lab))] = -1
        return out

    info = {"crossing": cmap[k], "loop": loop, "edge": big, "out": renum[e3], "edges": images}
    return Step(before, after, 0, apply, ev, info)


def _r1_remove(before: OrientedDiagram, ev: MovieEvent) -> Step:
    (loop,) = ev.edges
    ends = before.endpoints().get(loop)
    if not ends or ends[0][0] != ends[1][0]:
        raise IllegalEventError(f"edge {loop} is not the loop of a kink")
    k = ends[0][0]
    crossing = before.crossings[k]
    ports = frozenset((ends[0][1], ends[1][1]))
    pattern = KINK_PORTS.get(ports)
    if pattern is None or pattern[0] != crossing.sign:
        raise IllegalEventError(f"edge {loop} does not bound a kink at crossing {k}")
    if (ev.sign, ev.side) != pattern:
        raise IllegalEventError(f"kink at crossing {k} is {'+' if pattern[0] > 0 else '-'}{pattern[1]}")
    e1 = next(crossing.ports[p] for p in crossing.in_ports if p not in ports)
    ed = DiagramEditor(before)
    chains = ed.splice([k])
    after, renum, _ = ed.freeze()
    images = _images(before, renum, _absorbed(chains))
    kept_bit = 0 if crossing.sign > 0 else 1

    def apply(g):
        if g.bits[k] != kept_bit:
            return {}
        src = resolve(before, g.bits)
        c = src.circle_of[loop]
        bits = g.bits[:k] + g.bits[k + 1:]
        dst = resolve(after, bits)
        sigma = reorder_sign(g.bits, [k])
        lab = carry(src, g.labels, dst, images, skip=(c,))
        if crossing.sign > 0:
            if g.labels[c] != X:
                return {}
            return {EnhancedState(bits, _labels(dst, lab)): sigma}
        if g.labels[c] == ONE:
            return {EnhancedState(bits, _labels(dst, lab)): sigma}
        A = dst.circle_of[images[e1]]
        if lab[A] == X:
            return {}
        lab[A] = X
        return {EnhancedState(bits, _labels(dst, lab)): -sigma}

    return Step(before, after, 0, apply, ev, {"edge": images[e1], "crossing": k, "edges": images})


def _unpinch(d: OrientedDiagram, h: EnhancedState, bits: Tuple[int, ...], c_edge: int) -> EnhancedState:
    """Move a generator to `bits`, where c_edge sits on a small circle labeled 1."""
    src, dst = resolve(d, h.bits), resolve(d, bits)
    c = dst.circle_of[c_edge]
    lab = {c: ONE}
    for k, circle in enumerate(src.circles):
        e = next(e for e in circle if dst.circle_of[e] != c)
        lab[dst.circle_of[e]] = h.labels[k]
    return EnhancedState(bits, _labels(dst, lab))


def _r2_add(before: OrientedDiagram, ev: MovieEvent) -> Step:
    over, under = ev.edges
    _require_edges(before, (over, under))
    if over == under:
        raise IllegalEventError("an R2 move needs two different edges")
    if (ev.side, ev.parallel) not in FINGERS:
        raise IllegalEventError(f"unknown R2 side {ev.side!r}")
    ed = DiagramEditor(before)
    u1, u2, u3 = ed.cut(under, 2)
    o1, o2, o3 = ed.cut(over, 2)
    roles = {"u1": u1, "u2": u2, "u3": u3, "o1": o1, "o2": o2, "o3": o3}
    low_ports, low_sign, high_ports, high_sign = FINGERS[(ev.side, ev.parallel)]
    ed.add_crossing([roles[r] for r in low_ports], low_sign)
    ed.add_crossing([roles[r] for r in high_ports], high_sign)
    after, renum, _ = ed.freeze()
    images = _images(before, renum, {})
    n = before.n
    bigon_over, bigon_under = renum[o2], renum[u2]
    gamma = bigon_state(after, n, n + 1, bigon_over, bigon_under)
    delta = tuple(1 - t for t in gamma)
    flip_at = n + delta.index(0)

    def apply(g):
        src = resolve(before, g.bits)
        bits = g.bits + delta
        dst = resolve(after, bits)
        first = EnhancedState(bits, _labels(dst, carry(src, g.labels, dst, images)))
        out = {first: 1}
        for h, coeff in flip_map(after, first, flip_at).items():
            t = _unpinch(after, h, g.bits + gamma, bigon_over)
            out[t] = out.get(t, 0) + coeff
        return {t: c for t, c in out.items() if c}

    info = {"crossings": (n, n + 1), "over": bigon_over, "under": bigon_under, "edges": images}
    return Step(before, after, 0, apply, ev, info)


def _r2_remove(before: OrientedDiagram, ev: MovieEvent) -> Step:
    over, under = ev.edges
    ends = before.endpoints()
    if over not in ends or under not in ends:
        raise IllegalEventError("R2 removal needs two bigon edges between crossings")
    ks = {ends[over][0][0], ends[over][1][0]}
    if len(ks) != 2 or ks != {ends[under][0][0], ends[under][1][0]}:
        raise IllegalEventError(f"edges {over} and {under} do not bound a bigon")
    if any(p not in (1, 3) for _, p in ends[over]) or any(p not in (0, 2) for _, p in ends[under]):
        raise IllegalEventError(f"edge {over} must pass over edge {under} at both crossings")
    k1, k2 = sorted(ks)
    if before.crossings[k1].sign == before.crossings[k2].sign:
        raise IllegalEventError("bigon crossings have equal signs")
    gamma = bigon_state(before, k1, k2, over, under)
    if gamma not in ((0, 1), (1, 0)):
        raise IllegalEventError("bigon is a clasp, not an R2 configuration")
    delta = tuple(1 - t for t in gamma)
    flip_at = k1 if delta[0] == 1 else k2
    ed = DiagramEditor(before)
    chains = ed.splice([k1, k2])
    after, renum, _ = ed.freeze()
    images = _images(before, renum, _absorbed(chains))

    def strip(bits):
        return tuple(b for j, b in enumerate(bits) if j not in (k1, k2))

    def to_after(h: EnhancedState, coeff: int) -> Terms:
        src = resolve(before, h.bits)
        bits = strip(h.bits)
        dst = resolve(after, bits)
        # the bigon edges change strands in the crossing state that matches `after`
        lab = carry(src, h.labels, dst, images, avoid=(over, under))
        return {EnhancedState(bits, _labels(dst, lab)): coeff}

    def apply(g):
        local = (g.bits[k1], g.bits[k2])
        sigma = reorder_sign(g.bits, [k1, k2])
        if local == delta:
            return to_after(g, sigma)
        if local != gamma:
            return {}
        src = resolve(before, g.bits)
        c = src.circle_of[over]
        if g.labels[c] != X:
            return {}
        zero_bits = tuple(0 if j in (k1, k2) else b for j, b in enumerate(g.bits))
        zres = resolve(before, zero_bits)
        lab = carry(src, g.labels, zres, {e: e for e in before.edges}, skip=(c,))
        base = EnhancedState(zero_bits, _labels(zres, lab))
        out: Terms = {}
        for h, coeff in flip_map(before, base, flip_at).items():
            for t, v in to_after(h, -sigma * coeff).items():
                out[t] = out.get(t, 0) + v
        return {t: v for t, v in out.items() if v}

    info = {"edges": images, "crossings": (k1, k2), "over": images[over], "under": images[under]}
    return Step(before, after, 0, apply, ev, info)


def finger_variant(d: OrientedDiagram, over: int, under: int) -> Tuple[str, bool]:
    """(side, parallel) of the R2 template that produced the bigon over/under."""
    k_low = d.endpoints()[under][0][0]
    low = d.crossings[k_low]
    side = "L" if low.ports[1] == over else "R"
    return side, (low.sign > 0) == (side == "L")


def _isotopy(before: OrientedDiagram, ev: MovieEvent) -> Step:
    target = ev.target if ev.target is not None else parse_pd(ev.pd)
    found = find_isomorphism(before, target)
    if found is None:
        raise IllegalEventError("isotopy target is not the current frame up to renumbering")
    perm, emap = found

    def apply(g):
        bits = [0] * len(perm)
        for i, b in enumerate(g.bits):
            bits[perm[i]] = b
        bits = tuple(bits)
        src, dst = resolve(before, g.bits), resolve(target, bits)
        lab = carry(src, g.labels, dst, emap)
        ones = [i for i, b in enumerate(g.bits) if b]
        inversions = sum(1 for x in range(len(ones)) for y in range(x + 1, len(ones)) if perm[ones[x]] > perm[ones[y]])
        return {EnhancedState(bits, _labels(dst, lab)): -1 if inversions % 2 else 1}

    return Step(before, target, 0, apply, ev, {"edges": emap, "permutation": perm})


_HANDLERS = {
    "birth": _birth,
    "death": _death,
    "saddle": _saddle,
    "r1_add": _r1_add,
    "r1_remove": _r1_remove,
    "r2_add": _r2_add,
    "r2_remove": _r2_remove,
    "isotopy": _isotopy,
}


def apply_event(before: OrientedDiagram, ev: MovieEvent, frame: Optional[int] = None) -> Step:
    if ev.kind == "r3":
        raise UnsupportedEventError("R3 moves have no induced map", frame)
    handler = _HANDLERS.get(ev.kind)
    if handler is None:
        raise IllegalEventError(f"unknown event kind {ev.kind!r}", frame)
    try:
        step = handler(before, ev)
    except IllegalEventError as exc:
        if exc.frame is None and frame is not None:
            raise IllegalEventError(str(exc), frame) from exc
        raise
    logger.debug("frame %s: %s -> %s", frame, ev, step.after)
    return step
