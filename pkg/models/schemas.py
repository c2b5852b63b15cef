from typing import Any, Dict, List, Literal, Tuple

from pydantic import BaseModel, Field


class ChainElementModel(BaseModel):
    bigrading: List[int] | None = None
    # (bits, labels, coefficient) in generator order
    terms: List[Tuple[str, str, int]] = []


class MovieEventModel(BaseModel):
    type: Literal["birth", "death", "saddle", "r1", "r2", "r3", "isotopy"]
    circle: int | None = None
    edges: List[int] | None = None
    pairing: Literal["0", "1"] = "0"
    dir: Literal["add", "remove"] | None = None
    sign: Literal["+", "-"] | None = None
    edge: int | None = None
    side: Literal["L", "R"] | None = None
    over: int | None = None
    under: int | None = None
    parallel: bool = True
    pd: str | None = None


class MovieModel(BaseModel):
    name: str = ""
    initial: str = "empty"
    components: int | None = None
    euler: int | None = None
    events: List[MovieEventModel] = []
    expect_pd: Dict[int, str] = {}


class VerdictModel(BaseModel):
    bigrading: List[int] | None = None
    is_cycle: bool
    is_boundary: bool
    # "preimage" or "obstruction", with the vector or coordinate that proves it
    certificate: Dict[str, Any] = {}


class DistinctionReportModel(BaseModel):
    conclusion: Literal["distinguished", "not distinguished"]
    difference: VerdictModel
    sum: VerdictModel
    trimmed_difference: VerdictModel | None = None
    trimmed_sum: VerdictModel | None = None
    trims: List[Tuple[int, str]] = []


class CaseResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class SuiteReport(BaseModel):
    suite: str
    seed: int
    passed: bool = True
    cases: List[CaseResult] = []


class RunConfig(BaseModel):
    command: Literal["homology", "kj", "distinguish", "verify", "export"]
    inputs: List[str] = []
    max_crossings: int = Field(20, ge=0)
    trims: List[Tuple[int, str]] = []
    format: Literal["text", "json", "tsv"] = "text"
    seed: int = 0
    verbose: int = 0
    allow_large: bool = False
    runslow: bool = False


class KJReportModel(BaseModel):
    movie: str = ""
    cycle: ChainElementModel
    verdict: VerdictModel
    trims: List[Tuple[int, str]] = []
    trimmed_cycle: ChainElementModel | None = None
    trimmed_verdict: VerdictModel | None = None
