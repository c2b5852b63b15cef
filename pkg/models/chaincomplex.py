import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from models import config
from models.config import get_logger
from models.diagram import OrientedDiagram, Resolution, State, equal_up_to_renumbering, resolve
from models.errors import DimensionError, KJClassError, ParseError, ResourceLimitError
from models.intlinalg import SmithDecomposition, SparseIntMatrix, smith
from models.schemas import ChainElementModel

logger = get_logger(__name__)

ONE, X = "1", "x"


class Bigrading(NamedTuple):
    h: int
    q: int


@dataclass(frozen=True, order=True)
class EnhancedState:
    bits: Tuple[int, ...]
    # one label per circle of resolve(d, bits), by canonical circle id
    labels: str

    @property
    def state(self) -> State:
        return State(self.bits)

    @property
    def height(self) -> int:
        return sum(self.bits)

    @property
    def v_plus(self) -> int:
        return self.labels.count(ONE)

    @property
    def v_minus(self) -> int:
        return self.labels.count(X)

    def __str__(self):
        return f"[{''.join(map(str, self.bits))} | {self.labels}]"


def grade(d: OrientedDiagram, a: EnhancedState) -> Bigrading:
    h = a.height - d.n_minus
    return Bigrading(h, a.v_plus - a.v_minus + h + d.n_plus - d.n_minus)


def check_generator(d: OrientedDiagram, a: EnhancedState):
    if len(a.bits) != d.n:
        raise DimensionError(f"{a} has {len(a.bits)} bits for {d.n} crossings")
    k = len(resolve(d, a.bits))
    if len(a.labels) != k or set(a.labels) - {ONE, X}:
        raise DimensionError(f"{a} needs {k} labels over '1'/'x'")


@dataclass
class ChainElement:
    terms: Dict[EnhancedState, int] = field(default_factory=dict)
    bigrading: Optional[Bigrading] = None

    def __post_init__(self):
        self.terms = {g: c for g, c in self.terms.items() if c}

    @classmethod
    def zero(cls, bigrading: Optional[Bigrading] = None) -> "ChainElement":
        return cls({}, bigrading)

    @classmethod
    def generator(cls, d: OrientedDiagram, a: EnhancedState, coefficient: int = 1) -> "ChainElement":
        return cls({a: coefficient}, grade(d, a))

    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self) -> List[Tuple[EnhancedState, int]]:
        return sorted(self.terms.items())

    def _combine(self, other: "ChainElement", k: int) -> "ChainElement":
        if self.bigrading and other.bigrading and self.terms and other.terms and self.bigrading != other.bigrading:
            raise DimensionError(f"cannot add elements at {self.bigrading} and {other.bigrading}")
        out = dict(self.terms)
        for g, c in other.terms.items():
            out[g] = out.get(g, 0) + k * c
        bigrading = (self.bigrading if self.terms else other.bigrading) or self.bigrading or other.bigrading
        return ChainElement(out, bigrading)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return ChainElement({g: -c for g, c in self.terms.items()}, self.bigrading)

    def __rmul__(self, k: int):
        return ChainElement({g: k * c for g, c in self.terms.items()}, self.bigrading)

    def __eq__(self, other):
        return isinstance(other, ChainElement) and self.terms == other.terms

    def equal_up_to_sign(self, other: "ChainElement") -> bool:
        return self == other or self == -other

    def __len__(self):
        return len(self.terms)

    def __str__(self):
        return element_to_text(self)


def _labels(res: Resolution, assignment: Dict[int, str]) -> str:
    return "".join(assignment[k] for k in range(len(res)))


def transfer(src: Resolution, labels: str, dst: Resolution, skip: Iterable[int] = ()) -> Dict[int, str]:
    """Carry labels of circles not in `skip` to the dst circles sharing their edges."""
    skip = set(skip)
    return {dst.circle_of[circle[0]]: labels[k] for k, circle in enumerate(src.circles) if k not in skip}


def multiply(a: str, b: str) -> Optional[str]:
    if a == ONE:
        return b
    if b == ONE:
        return a
    return None


def flip_map(d: OrientedDiagram, a: EnhancedState, i: int) -> Dict[EnhancedState, int]:
    """Unsigned merge or split for the cube edge turning crossing i from 0 to 1."""
    if a.bits[i] != 0:
        return {}
    src = resolve(d, a.bits)
    target = a.bits[:i] + (1,) + a.bits[i + 1:]
    dst = resolve(d, target)
    c = d.crossings[i]
    A, B = (src.circle_of[e] for e in c.arc_edges(0))
    A2, B2 = (dst.circle_of[e] for e in c.arc_edges(1))
    if A == B and A2 == B2:
        return {}
    base = transfer(src, a.labels, dst, skip=(A, B))
    if A != B:
        product = multiply(a.labels[A], a.labels[B])
        if product is None:
            return {}
        base[A2] = product
        return {EnhancedState(target, _labels(dst, base)): 1}
    if a.labels[A] == X:
        base[A2], base[B2] = X, X
        return {EnhancedState(target, _labels(dst, base)): 1}
    out = {}
    for la, lb in ((ONE, X), (X, ONE)):
        base[A2], base[B2] = la, lb
        out[EnhancedState(target, _labels(dst, base))] = 1
    return out


def differential_terms(d: OrientedDiagram, a: EnhancedState) -> Dict[EnhancedState, int]:
    out: Dict[EnhancedState, int] = {}
    ones = 0
    for i, bit in enumerate(a.bits):
        if bit:
            ones += 1
            continue
        sign = -1 if ones % 2 else 1
        for g, c in flip_map(d, a, i).items():
            out[g] = out.get(g, 0) + sign * c
    return {g: c for g, c in out.items() if c}


class KhovanovComplex:
    """Generators and differentials of a diagram, assembled per bigrading on demand."""

    def __init__(self, d: OrientedDiagram):
        if d.n > config.MAX_CROSSINGS:
            raise ResourceLimitError(f"{d.n} crossings exceed the cap of {config.MAX_CROSSINGS}")
        self.diagram = d
        self._generators: Dict[Bigrading, List[EnhancedState]] = {}
        self._index: Dict[Bigrading, Dict[EnhancedState, int]] = {}
        self._matrices: Dict[Bigrading, SparseIntMatrix] = {}
        self._support: Optional[List[Bigrading]] = None
        self._smith: Dict[Bigrading, SmithDecomposition] = {}

    def bigradings(self) -> List[Bigrading]:
        """Every bigrading carrying at least one generator."""
        if self._support is None:
            d = self.diagram
            found = set()
            for bits in itertools.product((0, 1), repeat=d.n):
                k = len(resolve(d, bits))
                h = sum(bits) - d.n_minus
                for w in range(-k, k + 1, 2):
                    found.add(Bigrading(h, w + h + d.n_plus - d.n_minus))
            self._support = sorted(found)
        return self._support

    def generators(self, h: int, q: int) -> List[EnhancedState]:
        key = Bigrading(h, q)
        if key not in self._generators:
            d = self.diagram
            height = h + d.n_minus
            gens = []
            if 0 <= height <= d.n:
                w = q - h - d.n_plus + d.n_minus
                for ones in itertools.combinations(range(d.n), height):
                    bits = tuple(1 if i in ones else 0 for i in range(d.n))
                    k = len(resolve(d, bits))
                    if (k + w) % 2 or abs(w) > k:
                        continue
                    n_one = (k + w) // 2
                    for xs in itertools.combinations(range(k), k - n_one):
                        gens.append(EnhancedState(bits, "".join(X if j in xs else ONE for j in range(k))))
            gens.sort()
            self._generators[key] = gens
            self._index[key] = {g: n for n, g in enumerate(gens)}
        return self._generators[key]

    def rank(self, h: int, q: int) -> int:
        return len(self.generators(h, q))

    def index(self, h: int, q: int) -> Dict[EnhancedState, int]:
        self.generators(h, q)
        return self._index[Bigrading(h, q)]

    def matrix(self, h: int, q: int) -> SparseIntMatrix:
        """d^{h,q} from C^{h,q} to C^{h+1,q}."""
        key = Bigrading(h, q)
        if key not in self._matrices:
            cols = self.generators(h, q)
            rows = self.index(h + 1, q)
            entries = {}
            for j, g in enumerate(cols):
                for target, c in differential_terms(self.diagram, g).items():
                    entries[(rows[target], j)] = c
            m = SparseIntMatrix(len(rows), len(cols), entries)
            logger.debug("d^{%d,%d}: %dx%d, nnz=%d", h, q, m.rows, m.cols, len(m.entries))
            self._matrices[key] = m
            if config.DEBUG_CHECKS:
                self.check_square_zero(h - 1, q)
        return self._matrices[key]

    def smith_of(self, h: int, q: int) -> SmithDecomposition:
        key = Bigrading(h, q)
        if key not in self._smith:
            self._smith[key] = smith(self.matrix(h, q))
        return self._smith[key]

    def check_square_zero(self, h: int, q: int):
        if not self.rank(h, q):
            return
        product = self.matrix(h + 1, q) @ self.matrix(h, q)
        if product.entries:
            raise KJClassError(f"d∘d is nonzero at ({h}, {q})")

    def vector(self, e: ChainElement, h: int, q: int) -> List[int]:
        idx = self.index(h, q)
        out = [0] * len(idx)
        for g, c in e.terms.items():
            if g not in idx:
                raise DimensionError(f"{g} is not a generator at ({h}, {q})")
            out[idx[g]] = c
        return out

    def element(self, vector: Sequence[int], h: int, q: int) -> ChainElement:
        gens = self.generators(h, q)
        return ChainElement({gens[k]: c for k, c in enumerate(vector) if c}, Bigrading(h, q))


def build_complex(d: OrientedDiagram) -> KhovanovComplex:
    c = KhovanovComplex(d)
    logger.info("complex for %d crossings (n+=%d, n-=%d)", d.n, d.n_plus, d.n_minus)
    return c


def apply_differential(c: KhovanovComplex, e: ChainElement) -> ChainElement:
    out: Dict[EnhancedState, int] = {}
    for g, k in e.terms.items():
        for target, v in differential_terms(c.diagram, g).items():
            out[target] = out.get(target, 0) + k * v
    bigrading = Bigrading(e.bigrading.h + 1, e.bigrading.q) if e.bigrading else None
    return ChainElement(out, bigrading)


def pqr_chain(d: OrientedDiagram, s: State, marked: Sequence[Tuple[int, int]]) -> ChainElement:
    """Σ ± (one marked circle labeled 1, other marked circles x, unmarked circles 1)."""
    bits = s.bits if isinstance(s, State) else tuple(s)
    res = resolve(d, bits)
    circles = [c for c, _ in marked]
    if len(set(circles)) != len(circles):
        raise KJClassError(f"duplicate circle in {circles}")
    for c in circles:
        if not 0 <= c < len(res):
            raise KJClassError(f"unknown circle {c}; the resolution has {len(res)}")
    terms = {}
    for c, sign in marked:
        labels = "".join(ONE if k == c or k not in circles else X for k in range(len(res)))
        terms[EnhancedState(bits, labels)] = sign
    e = ChainElement(terms)
    if terms:
        e.bigrading = grade(d, next(iter(terms)))
    return e


def transport(e: ChainElement, src: OrientedDiagram, dst: OrientedDiagram) -> ChainElement:
    """Move an element between diagrams that are equal up to edge renumbering."""
    emap = equal_up_to_renumbering(src, dst)
    if emap is None:
        raise KJClassError("diagrams differ beyond edge renumbering")
    out = {}
    for g, c in e.terms.items():
        a, b = resolve(src, g.bits), resolve(dst, g.bits)
        assignment = {b.circle_of[emap[circle[0]]]: g.labels[k] for k, circle in enumerate(a.circles)}
        out[EnhancedState(g.bits, _labels(b, assignment))] = c
    return ChainElement(out, e.bigrading)


def element_to_text(e: ChainElement) -> str:
    if e.is_zero():
        return "0\n"
    return "".join(f"{'+' if c > 0 else '-'}{abs(c)} * {g}\n" for g, c in e.sorted_terms())


def element_from_text(text: str, d: Optional[OrientedDiagram] = None) -> ChainElement:
    terms = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line == "0":
            continue
        try:
            coeff, rest = line.split("*", 1)
            bits, labels = rest.strip().strip("[]").split("|")
            g = EnhancedState(tuple(int(b) for b in bits.strip()), labels.strip())
            terms[g] = terms.get(g, 0) + int(coeff.replace(" ", ""))
        except ValueError:
            raise ParseError(f"malformed chain term {line!r}", location=f"line {lineno}")
    e = ChainElement(terms)
    if d is not None and e.terms:
        for g in e.terms:
            check_generator(d, g)
        e.bigrading = grade(d, next(iter(e.terms)))
    return e


def element_model(e: ChainElement) -> ChainElementModel:
    return ChainElementModel(
        bigrading=list(e.bigrading) if e.bigrading else None,
        terms=[("".join(map(str, g.bits)), g.labels, c) for g, c in e.sorted_terms()],
    )


def element_to_json(e: ChainElement) -> str:
    return element_model(e).model_dump_json()


def element_from_json(text: str) -> ChainElement:
    model = ChainElementModel.model_validate_json(text)
    terms = {EnhancedState(tuple(int(b) for b in bits), labels): c for bits, labels, c in model.terms}
    return ChainElement(terms, Bigrading(*model.bigrading) if model.bigrading else None)
