import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx

from models.config import get_logger
from models.errors import DimensionError, MissingNestingError, ParseError

logger = get_logger(__name__)

Endpoint = Tuple[int, int]

# Port numbering: 0 incoming under, then counterclockwise. 2 is the outgoing under port.
STRAIGHT = {0: 2, 2: 0, 1: 3, 3: 1}
SMOOTHING = {
    0: {0: 1, 1: 0, 2: 3, 3: 2},
    1: {0: 3, 3: 0, 1: 2, 2: 1},
}


@dataclass(frozen=True)
class Crossing:
    ports: Tuple[int, int, int, int]
    sign: int

    @property
    def in_ports(self) -> Tuple[int, int]:
        return (0, 3) if self.sign > 0 else (0, 1)

    @property
    def out_ports(self) -> Tuple[int, int]:
        return (2, 1) if self.sign > 0 else (2, 3)

    def arc_edges(self, bit: int) -> Tuple[int, int]:
        """One edge from each of the two arcs of the given smoothing."""
        return (self.ports[0], self.ports[2]) if bit == 0 else (self.ports[0], self.ports[1])


@dataclass(frozen=True)
class OrientedDiagram:
    crossings: Tuple[Crossing, ...] = ()
    loops: Tuple[int, ...] = ()
    # None: nesting undeclared; () declares every Seifert circle unnested
    nesting: Optional[Tuple[Tuple[int, int], ...]] = None
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        self._cache["endpoints"] = _compute_endpoints(self.crossings, self.loops)

    @property
    def n(self) -> int:
        return len(self.crossings)

    @property
    def n_plus(self) -> int:
        return sum(1 for c in self.crossings if c.sign > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for c in self.crossings if c.sign < 0)

    @property
    def edges(self) -> Tuple[int, ...]:
        if "edges" not in self._cache:
            self._cache["edges"] = tuple(sorted(list(self.endpoints()) + list(self.loops)))
        return self._cache["edges"]

    def endpoints(self) -> Dict[int, Tuple[Endpoint, Endpoint]]:
        """(tail, head) of every edge that meets a crossing."""
        return self._cache["endpoints"]

    def edge_at(self, i: int, p: int) -> int:
        return self.crossings[i].ports[p]

    def is_empty(self) -> bool:
        return not self.crossings and not self.loops

    @property
    def components(self) -> Tuple[Tuple[int, ...], ...]:
        if "components" not in self._cache:
            self._cache["components"] = _trace_components(self)
        return self._cache["components"]

    def component_of(self, edge: int) -> int:
        for k, comp in enumerate(self.components):
            if edge in comp:
                return k
        raise KeyError(edge)

    def to_pd(self) -> str:
        tokens = [f"X({a},{b},{c},{d})" for (a, b, c, d) in (x.ports for x in self.crossings)]
        tokens += [f"O({e})" for e in self.loops]
        text = "PD[" + ", ".join(tokens) + "]"
        if self.nesting is not None:
            text += " NEST[" + ", ".join(f"{a}>{b}" for a, b in self.nesting) + "]"
        return text

    def __str__(self):
        return self.to_pd()


@dataclass(frozen=True)
class State:
    bits: Tuple[int, ...]

    @property
    def height(self) -> int:
        return sum(self.bits)


@dataclass(frozen=True)
class Resolution:
    circles: Tuple[Tuple[int, ...], ...]
    circle_of: Dict[int, int] = field(hash=False)

    def __len__(self):
        return len(self.circles)


@dataclass
class StateGraph:
    graph: nx.MultiGraph

    @property
    def vertices(self) -> List[int]:
        return sorted(self.graph.nodes)

    @property
    def edges(self) -> List[Tuple[int, int, int, int]]:
        """(u, v, crossing, trace) for every trace, ordered by crossing."""
        rows = [(u, v, k, data["trace"]) for u, v, k, data in self.graph.edges(keys=True, data=True)]
        return sorted(rows, key=lambda r: r[2])


def _compute_endpoints(crossings: Sequence[Crossing], loops: Sequence[int]) -> Dict[int, Tuple[Endpoint, Endpoint]]:
    seen: Dict[int, List[Endpoint]] = {}
    for i, c in enumerate(crossings):
        if c.sign not in (1, -1):
            raise ParseError(f"crossing {i} has no sign")
        for p, e in enumerate(c.ports):
            if not isinstance(e, int) or e <= 0:
                raise ParseError(f"edge ids must be positive integers, got {e!r}", location=f"crossing {i}")
            seen.setdefault(e, []).append((i, p))
    for e, ends in seen.items():
        if len(ends) != 2:
            raise ParseError(f"edge {e} appears {len(ends)} times")
    if len(set(loops)) != len(loops):
        raise ParseError("a crossingless loop is declared twice")
    for e in loops:
        if e <= 0:
            raise ParseError(f"edge ids must be positive integers, got {e!r}")
        if e in seen:
            raise ParseError(f"loop {e} also appears at a crossing")
    result = {}
    for e, (first, second) in seen.items():
        first_out = first[1] in crossings[first[0]].out_ports
        second_out = second[1] in crossings[second[0]].out_ports
        if first_out == second_out:
            raise ParseError(f"inconsistent orientation along edge {e}")
        result[e] = (first, second) if first_out else (second, first)
    return result


def _trace_components(d: OrientedDiagram) -> Tuple[Tuple[int, ...], ...]:
    ends = d.endpoints()
    seen = set()
    comps = []
    for e in sorted(ends):
        if e in seen:
            continue
        comp = []
        cur = e
        while cur not in seen:
            seen.add(cur)
            comp.append(cur)
            i, p = ends[cur][1]
            cur = d.crossings[i].ports[STRAIGHT[p]]
        comps.append(tuple(comp))
    comps += [(e,) for e in d.loops]
    return tuple(sorted(comps, key=min))


def infer_signs(ports: Sequence[Tuple[int, int, int, int]]) -> List[int]:
    """Crossing signs from the under-strand data, propagated along edges."""
    n = len(ports)
    where: Dict[int, List[Endpoint]] = {}
    for i, quad in enumerate(ports):
        for p, e in enumerate(quad):
            where.setdefault(e, []).append((i, p))
    over_in: List[Optional[int]] = [None] * n

    def status(i, p):
        if p == 0:
            return True
        if p == 2:
            return False
        if over_in[i] is None:
            return None
        return over_in[i] == p

    while True:
        changed = True
        while changed:
            changed = False
            for ends in where.values():
                if len(ends) != 2:
                    continue
                (i, p), (j, q) = ends
                s1, s2 = status(i, p), status(j, q)
                if s1 is None and s2 is not None:
                    over_in[i] = p if not s2 else STRAIGHT[p]
                    changed = True
                elif s2 is None and s1 is not None:
                    over_in[j] = q if not s1 else STRAIGHT[q]
                    changed = True
        undecided = [i for i in range(n) if over_in[i] is None]
        if not undecided:
            break
        i = undecided[0]
        b, d = ports[i][1], ports[i][3]
        over_in[i] = 3 if (b - d == 1 or d - b > 1) else 1
    return [1 if o == 3 else -1 for o in over_in]


_PD_RE = re.compile(r"^\s*PD\s*\[(?P<body>[^\[\]]*)\]\s*(?:NEST\s*\[(?P<nest>[^\[\]]*)\]\s*)?$")
_TOKEN_RE = re.compile(r"\s*(?P<kind>[XO])\s*\((?P<args>[^()]*)\)\s*(?P<sep>,?)")
_NEST_RE = re.compile(r"^\s*(\d+)\s*>\s*(\d+)\s*$")


def _parse_ints(args: str, where: str) -> List[int]:
    try:
        return [int(a) for a in args.split(",")]
    except ValueError:
        raise ParseError(f"non-integer edge id in ({args})", location=where)


def parse_pd(text: str) -> OrientedDiagram:
    """Parse `PD[X(a,b,c,d), ..., O(k), ...] NEST[c1>c2, ...]`."""
    m = _PD_RE.match(text)
    if not m:
        raise ParseError("expected PD[...] with an optional NEST[...] block", location="offset 0")
    body = m.group("body")
    base = m.start("body")
    quads: List[Tuple[int, int, int, int]] = []
    loops: List[int] = []
    pos = 0
    while body[pos:].strip():
        tok = _TOKEN_RE.match(body, pos)
        if not tok:
            raise ParseError("malformed token", location=f"offset {base + pos}")
        where = f"offset {base + tok.start('kind')}"
        args = _parse_ints(tok.group("args"), where)
        if tok.group("kind") == "X":
            if len(args) != 4:
                raise ParseError("X(...) takes four edge ids", location=where)
            quads.append(tuple(args))
        else:
            if len(args) != 1:
                raise ParseError("O(...) takes one edge id", location=where)
            loops.append(args[0])
        pos = tok.end()
        if not tok.group("sep") and body[pos:].strip():
            raise ParseError("expected ','", location=f"offset {base + pos}")
    counts: Dict[int, int] = {}
    for quad in quads:
        for e in quad:
            counts[e] = counts.get(e, 0) + 1
    for e, k in sorted(counts.items()):
        if k != 2:
            raise ParseError(f"edge {e} appears {k} times")
    nesting = None
    if m.group("nest") is not None:
        pairs = []
        for entry in filter(None, (s.strip() for s in m.group("nest").split(","))):
            nm = _NEST_RE.match(entry)
            if not nm:
                raise ParseError(f"malformed nesting entry {entry!r}", location="NEST")
            pairs.append((int(nm.group(1)), int(nm.group(2))))
        nesting = tuple(pairs)
    signs = infer_signs(quads)
    d = OrientedDiagram(tuple(Crossing(q, s) for q, s in zip(quads, signs)), tuple(loops), nesting)
    logger.debug("parsed diagram with %d crossings (n+=%d, n-=%d)", d.n, d.n_plus, d.n_minus)
    return d


def _bits(d: OrientedDiagram, s: Union[State, Iterable[int]]) -> Tuple[int, ...]:
    bits = s.bits if isinstance(s, State) else tuple(s)
    if len(bits) != d.n:
        raise DimensionError(f"state has {len(bits)} bits for {d.n} crossings")
    return bits


def resolve(d: OrientedDiagram, s: Union[State, Iterable[int]]) -> Resolution:
    bits = _bits(d, s)
    key = ("res", bits)
    cached = d._cache.get(key)
    if cached is not None:
        return cached
    ends = d.endpoints()
    loops = set(d.loops)
    circle_of: Dict[int, int] = {}
    circles = []
    for e in d.edges:
        if e in circle_of:
            continue
        cid = len(circles)
        if e in loops:
            circle_of[e] = cid
            circles.append((e,))
            continue
        walk = []
        cur, entry = e, ends[e][0]
        while True:
            walk.append(cur)
            circle_of[cur] = cid
            a, b = ends[cur]
            i, p = b if entry == a else a
            q = SMOOTHING[bits[i]][p]
            cur, entry = d.crossings[i].ports[q], (i, q)
            if cur == e:
                break
        circles.append(tuple(walk))
    res = Resolution(tuple(circles), circle_of)
    d._cache[key] = res
    return res


def orientation_state(d: OrientedDiagram) -> State:
    return State(tuple(0 if c.sign > 0 else 1 for c in d.crossings))


def trace_graph(d: OrientedDiagram, s: Union[State, Iterable[int]]) -> StateGraph:
    bits = _bits(d, s)
    res = resolve(d, bits)
    g = nx.MultiGraph()
    g.add_nodes_from(range(len(res)))
    for i, c in enumerate(d.crossings):
        e1, e2 = c.arc_edges(bits[i])
        g.add_edge(res.circle_of[e1], res.circle_of[e2], key=i, trace=bits[i])
    return StateGraph(g)


def subgraph(g: StateGraph, trace_type: int) -> StateGraph:
    h = nx.MultiGraph()
    h.add_nodes_from(g.graph.nodes)
    h.add_edges_from((u, v, k, data) for u, v, k, data in g.graph.edges(keys=True, data=True)
                     if data["trace"] == trace_type)
    return StateGraph(h)


def betti1(g: StateGraph) -> int:
    graph = g.graph
    if graph.number_of_nodes() == 0:
        return 0
    return graph.number_of_edges() - graph.number_of_nodes() + nx.number_connected_components(graph)


def seifert_nesting(d: OrientedDiagram) -> List[int]:
    """Seifert circle ids, outermost first."""
    res = resolve(d, orientation_state(d))
    k = len(res)
    if d.nesting is None:
        if k > 1:
            raise MissingNestingError(f"{k} Seifert circles but no NEST annotation")
        return list(range(k))
    containment = nx.DiGraph()
    containment.add_nodes_from(range(k))
    for outer, inner in d.nesting:
        if outer >= k or inner >= k:
            raise MissingNestingError(f"NEST names circle {max(outer, inner)} but there are {k} Seifert circles")
        containment.add_edge(outer, inner)
    if not nx.is_directed_acyclic_graph(containment):
        raise MissingNestingError("NEST containment is cyclic")
    return sorted(range(k), key=lambda c: (len(nx.ancestors(containment, c)), c))


EMPTY = OrientedDiagram()


def equal_up_to_renumbering(a: OrientedDiagram, b: OrientedDiagram) -> Optional[Dict[int, int]]:
    """Edge map a -> b carrying crossing i to crossing i port by port, or None."""
    if a.n != b.n or len(a.loops) != len(b.loops):
        return None
    mapping: Dict[int, int] = {}
    for ca, cb in zip(a.crossings, b.crossings):
        if ca.sign != cb.sign:
            return None
        for ea, eb in zip(ca.ports, cb.ports):
            if mapping.setdefault(ea, eb) != eb:
                return None
    if len(set(mapping.values())) != len(mapping):
        return None
    mapping.update(zip(sorted(a.loops), sorted(b.loops)))
    return mapping
