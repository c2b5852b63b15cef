from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import pandas as pd

from models.chaincomplex import (
    Bigrading,
    ChainElement,
    KhovanovComplex,
    apply_differential,
    element_to_text,
    grade,
)
from models.config import get_logger
from models.intlinalg import solve_with
from models.schemas import VerdictModel

logger = get_logger(__name__)

TABLE_COLUMNS = ["h", "q", "free_rank", "torsion"]


@dataclass
class HomologyGroup:
    bigrading: Bigrading
    free_rank: int
    torsion: List[int] = field(default_factory=list)

    def is_zero(self) -> bool:
        return not self.free_rank and not self.torsion


@dataclass
class HomologyVerdict:
    subject: ChainElement
    is_cycle: bool
    is_boundary: bool
    certificate: Dict[str, object] = field(default_factory=dict)

    @property
    def nontrivial(self) -> bool:
        return self.is_cycle and not self.is_boundary

    def to_model(self) -> VerdictModel:
        b = self.subject.bigrading
        return VerdictModel(
            bigrading=list(b) if b else None,
            is_cycle=self.is_cycle,
            is_boundary=self.is_boundary,
            certificate=self.certificate,
        )


def homology_groups(c: KhovanovComplex) -> Dict[Bigrading, HomologyGroup]:
    groups = {}
    for h, q in c.bigradings():
        n = c.rank(h, q)
        rank_out = c.smith_of(h, q).rank
        incoming = c.smith_of(h - 1, q)
        free = n - rank_out - incoming.rank
        group = HomologyGroup(Bigrading(h, q), free, incoming.invariant_factors)
        if not group.is_zero():
            groups[group.bigrading] = group
    logger.info("homology: %d nonzero bigradings", len(groups))
    return groups


def _bigrading_of(c: KhovanovComplex, e: ChainElement) -> Optional[Bigrading]:
    if e.bigrading is not None:
        return e.bigrading
    if e.terms:
        return grade(c.diagram, next(iter(e.terms)))
    return None


def classify(c: KhovanovComplex, e: ChainElement) -> HomologyVerdict:
    bigrading = _bigrading_of(c, e)
    if e.is_zero():
        return HomologyVerdict(e, True, True, {"kind": "zero"})
    h, q = bigrading
    if e.bigrading is None:
        e = ChainElement(e.terms, bigrading)
    boundary = apply_differential(c, e)
    if not boundary.is_zero():
        return HomologyVerdict(e, False, False, {"kind": "not a cycle", "differential": element_to_text(boundary)})
    solution = solve_with(c.smith_of(h - 1, q), c.vector(e, h, q))
    if solution.x is not None:
        return HomologyVerdict(e, True, True, {"kind": "preimage", "vector": solution.x})
    return HomologyVerdict(e, True, False, {"kind": "obstruction", "coordinate": solution.obstruction})


def homologous_up_to_sign(c: KhovanovComplex, a: ChainElement, b: ChainElement) -> Tuple[bool, Dict[str, object]]:
    for sign, label in ((1, "a-b"), (-1, "a+b")):
        verdict = classify(c, a - sign * b)
        if verdict.is_boundary:
            return True, {"sign": label, **verdict.certificate}
    return False, {}


def euler_characteristic(c: KhovanovComplex) -> Dict[int, Tuple[int, int]]:
    """Per q: alternating sum of chain ranks and of homology free ranks."""
    from_chains: Dict[int, int] = {}
    for h, q in c.bigradings():
        from_chains[q] = from_chains.get(q, 0) + (-1) ** (h % 2) * c.rank(h, q)
    from_homology: Dict[int, int] = {}
    for (h, q), group in homology_groups(c).items():
        from_homology[q] = from_homology.get(q, 0) + (-1) ** (h % 2) * group.free_rank
    qs = sorted(set(from_chains) | set(from_homology))
    return {q: (from_chains.get(q, 0), from_homology.get(q, 0)) for q in qs}


def homology_table(groups: Dict[Bigrading, HomologyGroup]) -> pd.DataFrame:
    rows = [
        {"h": g.bigrading.h, "q": g.bigrading.q, "free_rank": g.free_rank, "torsion": ";".join(map(str, g.torsion))}
        for g in sorted(groups.values(), key=lambda g: g.bigrading)
    ]
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def write_table(df: pd.DataFrame) -> str:
    return df.to_csv(sep="\t", index=False)
