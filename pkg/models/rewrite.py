from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from models.config import get_logger
from models.diagram import SMOOTHING, STRAIGHT, Crossing, Endpoint, OrientedDiagram

logger = get_logger(__name__)


class DiagramEditor:
    """Mutable working copy of a diagram, rewritten one local move at a time.

    Edge ids handed out by `new_edge` sort after every existing edge, in creation
    order, so `freeze` renumbers surviving edges by old id and appends new ones.
    """

    def __init__(self, d: OrientedDiagram):
        self.ports: List[List[int]] = [list(c.ports) for c in d.crossings]
        self.signs: List[int] = [c.sign for c in d.crossings]
        self.alive: List[bool] = [True] * d.n
        self.loops: List[int] = list(d.loops)
        self._order = {e: (0, e) for e in d.edges}
        self._next_id = max(d.edges, default=0) + 1

    def new_edge(self) -> int:
        e = self._next_id
        self._next_id += 1
        self._order[e] = (1, e)
        return e

    def out_ports(self, i: int) -> Tuple[int, int]:
        return (2, 1) if self.signs[i] > 0 else (2, 3)

    def locate(self, e: int) -> List[Endpoint]:
        return [(i, p) for i, quad in enumerate(self.ports) if self.alive[i] for p, f in enumerate(quad) if f == e]

    def has_edge(self, e: int) -> bool:
        return e in self.loops or bool(self.locate(e))

    def tail(self, e: int) -> Optional[Endpoint]:
        for i, p in self.locate(e):
            if p in self.out_ports(i):
                return (i, p)
        return None

    def head(self, e: int) -> Optional[Endpoint]:
        for i, p in self.locate(e):
            if p not in self.out_ports(i):
                return (i, p)
        return None

    def set_port(self, end: Endpoint, e: int):
        self.ports[end[0]][end[1]] = e

    def cut(self, e: int, k: int) -> List[int]:
        """Cut e at k points; pieces in orientation order, the first keeps e's id.

        A free loop cut at k points has k pieces; the returned list repeats the
        first piece at the end so it always has k + 1 entries.
        """
        if e in self.loops:
            self.loops.remove(e)
            return [e] + [self.new_edge() for _ in range(k - 1)] + [e]
        head = self.head(e)
        pieces = [e] + [self.new_edge() for _ in range(k)]
        self.set_port(head, pieces[-1])
        return pieces

    def add_crossing(self, ports: Sequence[int], sign: int) -> int:
        self.ports.append(list(ports))
        self.signs.append(sign)
        self.alive.append(True)
        return len(self.ports) - 1

    def splice(self, removed: Iterable[int]) -> Dict[int, List[int]]:
        """Delete crossings, joining each strand straight through them.

        Returns the surviving edge of every joined chain with the chain's members.
        """
        removed = set(removed)
        ends = {}
        for i in removed:
            for e in self.ports[i]:
                ends[e] = (self.tail(e), self.head(e))

        def inside(end):
            return end is not None and end[0] in removed

        def follow(start):
            chain, cur = [start], start
            while True:
                head = ends[cur][1]
                if not inside(head):
                    return chain, head
                i, p = head
                cur = self.ports[i][STRAIGHT[p]]
                if cur == start:
                    return chain, None
                chain.append(cur)

        used = set()
        joined = []
        openers = sorted((e for e in ends if not inside(ends[e][0])), key=self._order.__getitem__)
        rest = sorted((e for e in ends if inside(ends[e][0])), key=self._order.__getitem__)
        for e in openers + rest:
            if e in used:
                continue
            chain, head = follow(e)
            used.update(chain)
            joined.append((chain, head))
        for i in removed:
            self.alive[i] = False
        result = {}
        for chain, head in joined:
            if head is None:
                keep = min(chain, key=self._order.__getitem__)
                self.loops.append(keep)
            else:
                keep = chain[0]
                self.set_port(head, keep)
            result[keep] = chain
        return result

    def reverse(self, edges: Iterable[int]):
        """Reverse the orientation of the component made of `edges`."""
        edges = set(edges)
        for i, quad in enumerate(self.ports):
            if not self.alive[i]:
                continue
            under, over = quad[0] in edges, quad[1] in edges
            if under:
                self.ports[i] = quad[2:] + quad[:2]
            if under != over:
                self.signs[i] = -self.signs[i]

    def freeze(self, nesting=None) -> Tuple[OrientedDiagram, Dict[int, int], Dict[int, int]]:
        """Renumbered diagram, edge map (editor id -> new id) and crossing map."""
        live = [i for i, ok in enumerate(self.alive) if ok]
        present = {e for i in live for e in self.ports[i]} | set(self.loops)
        order = sorted(present, key=self._order.__getitem__)
        renum = {e: k + 1 for k, e in enumerate(order)}
        crossings = tuple(Crossing(tuple(renum[e] for e in self.ports[i]), self.signs[i]) for i in live)
        loops = tuple(sorted(renum[e] for e in self.loops))
        cmap = {i: k for k, i in enumerate(live)}
        return OrientedDiagram(crossings, loops, nesting), renum, cmap


def renumbered(d: OrientedDiagram) -> OrientedDiagram:
    return DiagramEditor(d).freeze(d.nesting)[0]


def smooth_crossing(d: OrientedDiagram, index: int, bit: int = 0):
    """Replace one crossing by a smoothing and re-derive the orientation.

    Each component of the result keeps the direction of its least edge. Returns
    the renumbered diagram, a map from its edge ids to the merged old edge ids,
    and the crossing map.
    """
    ends = d.endpoints()
    x = d.crossings[index]
    partner = SMOOTHING[bit]

    def at_x(end):
        return end[0] == index

    def walk(e, forward):
        members, cur, fwd = [], e, forward
        start = ends[e][0] if forward else ends[e][1]
        while True:
            members.append((cur, fwd))
            far = ends[cur][1] if fwd else ends[cur][0]
            if not at_x(far):
                return members, start, far
            q = partner[far[1]]
            nxt = x.ports[q]
            if nxt == e:
                return members, None, None
            cur, fwd = nxt, ends[nxt][0] == (index, q)

    used = set()
    chains = []
    touching = sorted(set(x.ports))
    for e in touching:
        if e in used:
            continue
        if not at_x(ends[e][0]):
            chain = walk(e, True)
        elif not at_x(ends[e][1]):
            chain = walk(e, False)
        else:
            continue
        used.update(m for m, _ in chain[0])
        chains.append(chain)
    for e in touching:
        if e not in used:
            chain = walk(e, True)
            used.update(m for m, _ in chain[0])
            chains.append(chain)

    ports = {i: list(c.ports) for i, c in enumerate(d.crossings) if i != index}
    tentative: Dict[int, Tuple[Endpoint, Endpoint]] = {e: ends[e] for e in ends if e not in used}
    origin: Dict[int, List[int]] = {e: [e] for e in d.edges if e not in used}
    loops = list(d.loops)
    for members, start, stop in chains:
        cid = min(m for m, _ in members)
        origin[cid] = [m for m, _ in members]
        if start is None:
            loops.append(cid)
            continue
        ports[start[0]][start[1]] = cid
        ports[stop[0]][stop[1]] = cid
        forward = dict(members)[cid]
        tentative[cid] = (start, stop) if forward else (stop, start)

    positions: Dict[int, List[Endpoint]] = {}
    for i, quad in ports.items():
        for p, e in enumerate(quad):
            positions.setdefault(e, []).append((i, p))
    new_head: Dict[int, Endpoint] = {}
    for e in sorted(positions):
        if e in new_head:
            continue
        cur, tail = e, tentative[e][0]
        while cur not in new_head:
            a, b = positions[cur]
            head = b if tail == a else a
            new_head[cur] = head
            i, p = head
            q = STRAIGHT[p]
            cur, tail = ports[i][q], (i, q)

    crossings = []
    for i in sorted(ports):
        quad = ports[i]
        r = 0 if new_head[quad[0]] == (i, 0) else 2
        rotated = [quad[(k + r) % 4] for k in range(4)]
        sign = 1 if new_head[rotated[3]] == (i, (3 + r) % 4) else -1
        crossings.append(Crossing(tuple(rotated), sign))

    order = sorted(set(positions) | set(loops))
    renum = {e: k + 1 for k, e in enumerate(order)}
    result = OrientedDiagram(
        tuple(Crossing(tuple(renum[e] for e in c.ports), c.sign) for c in crossings),
        tuple(sorted(renum[e] for e in loops)),
    )
    cmap = {i: k for k, i in enumerate(sorted(ports))}
    return result, {renum[e]: origin[e] for e in order}, cmap


def find_isomorphism(a: OrientedDiagram, b: OrientedDiagram) -> Optional[Tuple[List[int], Dict[int, int]]]:
    """Crossing permutation and edge bijection carrying a onto b port by port."""
    if (a.n, len(a.loops), a.n_plus) != (b.n, len(b.loops), b.n_plus):
        return None
    a_ends, b_ends = a.endpoints(), b.endpoints()

    def other(ends, e, end):
        t, h = ends[e]
        return h if end == t else t

    crossing_graph = nx.Graph()
    crossing_graph.add_nodes_from(range(a.n))
    for t, h in a_ends.values():
        crossing_graph.add_edge(t[0], h[0])
    groups = sorted((sorted(g) for g in nx.connected_components(crossing_graph)), key=min)

    def extend(state, seed, target):
        perm, emap = state
        used_b, used_e = set(perm.values()), set(emap.values())
        stack = [(seed, target)]
        while stack:
            i, j = stack.pop()
            if i in perm:
                if perm[i] != j:
                    return False
                continue
            if j in used_b or a.crossings[i].sign != b.crossings[j].sign:
                return False
            perm[i] = j
            used_b.add(j)
            for p in range(4):
                e, f = a.crossings[i].ports[p], b.crossings[j].ports[p]
                if e in emap:
                    if emap[e] != f:
                        return False
                    continue
                if f in used_e:
                    return False
                emap[e] = f
                used_e.add(f)
                (k, r), (k2, r2) = other(a_ends, e, (i, p)), other(b_ends, f, (j, p))
                if r != r2:
                    return False
                stack.append((k, k2))
        return True

    def search(g, state):
        if g == len(groups):
            return state
        for j in range(b.n):
            trial = (dict(state[0]), dict(state[1]))
            if extend(trial, groups[g][0], j):
                found = search(g + 1, trial)
                if found is not None:
                    return found
        return None

    found = search(0, ({}, {}))
    if found is None:
        return None
    perm, emap = found
    emap.update(zip(sorted(a.loops), sorted(b.loops)))
    return [perm[i] for i in range(a.n)], emap
