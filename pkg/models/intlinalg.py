from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import sympy

from models import config
from models.config import get_logger
from models.errors import DimensionError, KJClassError, ResourceLimitError

logger = get_logger(__name__)

# every DAMPING_PERIOD-th pivot is chosen by entry size
DAMPING_PERIOD = 8


class SparseIntMatrix:
    """Integer matrix stored as {(row, col): value} with no zero entries."""

    def __init__(self, rows: int, cols: int, entries: Optional[Dict[Tuple[int, int], int]] = None):
        self.rows = rows
        self.cols = cols
        self.entries: Dict[Tuple[int, int], int] = {}
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise DimensionError(f"entry ({i}, {j}) outside a {rows}x{cols} matrix")
            if v:
                self.entries[(i, j)] = int(v)

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[int]], cols: Optional[int] = None) -> "SparseIntMatrix":
        rows = len(dense)
        cols = len(dense[0]) if rows else (cols or 0)
        return cls(rows, cols, {(i, j): v for i, row in enumerate(dense) for j, v in enumerate(row) if v})

    @classmethod
    def identity(cls, n: int) -> "SparseIntMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    def to_dense(self) -> List[List[int]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def get(self, i: int, j: int) -> int:
        return self.entries.get((i, j), 0)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def __eq__(self, other):
        return isinstance(other, SparseIntMatrix) and self.shape == other.shape and self.entries == other.entries

    def __matmul__(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        by_row: Dict[int, Dict[int, int]] = {}
        for (k, j), v in other.entries.items():
            by_row.setdefault(k, {})[j] = v
        out: Dict[Tuple[int, int], int] = {}
        for (i, k), a in self.entries.items():
            for j, b in by_row.get(k, {}).items():
                out[(i, j)] = out.get((i, j), 0) + a * b
        return SparseIntMatrix(self.rows, other.cols, out)

    def apply(self, vector: Sequence[int]) -> List[int]:
        if len(vector) != self.cols:
            raise DimensionError(f"vector of length {len(vector)} for a matrix with {self.cols} columns")
        out = [0] * self.rows
        for (i, j), v in self.entries.items():
            out[i] += v * vector[j]
        return out

    def transpose(self) -> "SparseIntMatrix":
        return SparseIntMatrix(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()})

    def __repr__(self):
        return f"SparseIntMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"


@dataclass
class SmithDecomposition:
    U: SparseIntMatrix
    V: SparseIntMatrix
    diag: List[int]
    source: SparseIntMatrix = field(repr=False)

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diag if d)

    @property
    def invariant_factors(self) -> List[int]:
        return [d for d in self.diag if d > 1]

    def diagonal_matrix(self) -> SparseIntMatrix:
        m = self.source
        return SparseIntMatrix(m.rows, m.cols, {(i, i): d for i, d in enumerate(self.diag) if d})


class _Reducer:
    """Row and column reduction of a sparse matrix with U and V tracking."""

    def __init__(self, m: SparseIntMatrix):
        self.rows: Dict[int, Dict[int, int]] = {i: {} for i in range(m.rows)}
        self.cols: Dict[int, Set[int]] = {j: set() for j in range(m.cols)}
        for (i, j), v in m.entries.items():
            self.rows[i][j] = v
            self.cols[j].add(i)
        self.u: Dict[int, Dict[int, int]] = {i: {i: 1} for i in range(m.rows)}
        self.v: Dict[int, Dict[int, int]] = {j: {j: 1} for j in range(m.cols)}

    def _set(self, i, j, value):
        if value:
            self.rows[i][j] = value
            self.cols[j].add(i)
        else:
            self.rows[i].pop(j, None)
            self.cols[j].discard(i)

    @staticmethod
    def _axpy(target: Dict[int, int], source: Dict[int, int], k: int):
        for key, val in source.items():
            nv = target.get(key, 0) + k * val
            if nv:
                target[key] = nv
            else:
                target.pop(key, None)

    def row_add(self, dst, src, k):
        for j, val in list(self.rows[src].items()):
            self._set(dst, j, self.rows[dst].get(j, 0) + k * val)
        self._axpy(self.u[dst], self.u[src], k)

    def col_add(self, dst, src, k):
        for i in list(self.cols[src]):
            self._set(i, dst, self.rows[i].get(dst, 0) + k * self.rows[i][src])
        self._axpy(self.v[dst], self.v[src], k)

    def swap_rows(self, a, b):
        if a == b:
            return
        for j in set(self.rows[a]) | set(self.rows[b]):
            va, vb = self.rows[a].get(j, 0), self.rows[b].get(j, 0)
            self._set(a, j, vb)
            self._set(b, j, va)
        self.u[a], self.u[b] = self.u[b], self.u[a]

    def swap_cols(self, a, b):
        if a == b:
            return
        for i in self.cols[a] | self.cols[b]:
            va, vb = self.rows[i].get(a, 0), self.rows[i].get(b, 0)
            self._set(i, a, vb)
            self._set(i, b, va)
        self.v[a], self.v[b] = self.v[b], self.v[a]

    def negate_row(self, i):
        for j in list(self.rows[i]):
            self.rows[i][j] = -self.rows[i][j]
        self.u[i] = {k: -val for k, val in self.u[i].items()}

    def choose_pivot(self, t, damp: bool = False) -> Optional[Tuple[int, int]]:
        """Least Markowitz fill-in (r - 1)(c - 1), then smallest entry.

        A damping step ranks by entry size first, so a unit pivot wins over a
        sparser large one before coefficients grow.
        """
        best, best_key = None, None
        for j, members in self.cols.items():
            if j < t:
                continue
            active = [i for i in members if i >= t]
            for i in active:
                size = abs(self.rows[i][j])
                fill = (len(active) - 1) * (len(self.rows[i]) - 1)
                key = (size, fill) if damp else (fill, size)
                if best_key is None or key < best_key:
                    best, best_key = (i, j), key
                    if fill == 0 and size == 1:
                        return best
        return best

    def clear(self, t):
        """Eliminate row t and column t around the pivot at (t, t)."""
        while True:
            pivot = self.rows[t][t]
            moved = False
            for i in sorted(self.cols[t] - {t}):
                q = self.rows[i][t] // pivot
                self.row_add(i, t, -q)
                if self.rows[i].get(t):
                    self.swap_rows(i, t)
                    moved = True
                    break
            if moved:
                continue
            for j in sorted(set(self.rows[t]) - {t}):
                q = self.rows[t][j] // pivot
                self.col_add(j, t, -q)
                if self.rows[t].get(j):
                    self.swap_cols(j, t)
                    moved = True
                    break
            if not moved:
                break
        if self.rows[t][t] < 0:
            self.negate_row(t)

    def fix_divisibility(self, diag: List[int]):
        r = sum(1 for d in diag if d)
        for i in range(r):
            for j in range(i + 1, r):
                a, b = diag[i], diag[j]
                if b % a == 0:
                    continue
                g, s, t = _extended_gcd(a, b)
                ui, uj = self.u[i], self.u[j]
                new_ui, new_uj = {}, {}
                self._axpy(new_ui, ui, s)
                self._axpy(new_ui, uj, t)
                self._axpy(new_uj, ui, -(b // g))
                self._axpy(new_uj, uj, a // g)
                self.u[i], self.u[j] = new_ui, new_uj
                vi, vj = self.v[i], self.v[j]
                new_vi, new_vj = {}, {}
                self._axpy(new_vi, vi, 1)
                self._axpy(new_vi, vj, 1)
                self._axpy(new_vj, vi, -(t * b // g))
                self._axpy(new_vj, vj, s * a // g)
                self.v[i], self.v[j] = new_vi, new_vj
                diag[i], diag[j] = g, a * b // g


def _extended_gcd(a: int, b: int) -> Tuple[int, int, int]:
    old_r, r, old_s, s, old_t, t = a, b, 1, 0, 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def smith(m: SparseIntMatrix) -> SmithDecomposition:
    """U, V unimodular and diag with U·m·V = diag, each invariant dividing the next."""
    if max(m.rows, m.cols) > config.MAX_MATRIX_DIM:
        raise ResourceLimitError(f"{m.rows}x{m.cols} matrix exceeds the size cap {config.MAX_MATRIX_DIM}")
    red = _Reducer(m)
    t = 0
    while t < min(m.rows, m.cols):
        pivot = red.choose_pivot(t, damp=(t + 1) % DAMPING_PERIOD == 0)
        if pivot is None:
            break
        red.swap_rows(pivot[0], t)
        red.swap_cols(pivot[1], t)
        red.clear(t)
        t += 1
    diag = [red.rows[i].get(i, 0) for i in range(min(m.rows, m.cols))]
    red.fix_divisibility(diag)
    U = SparseIntMatrix(m.rows, m.rows, {(i, k): v for i, row in red.u.items() for k, v in row.items()})
    V = SparseIntMatrix(m.cols, m.cols, {(k, j): v for j, col in red.v.items() for k, v in col.items()})
    dec = SmithDecomposition(U, V, diag, m)
    logger.debug("smith %dx%d: rank %d, torsion %s", m.rows, m.cols, dec.rank, dec.invariant_factors)
    if config.DEBUG_CHECKS:
        verify_smith(dec)
    return dec


def verify_smith(dec: SmithDecomposition):
    if dec.U @ dec.source @ dec.V != dec.diagonal_matrix():
        raise KJClassError("Smith reconstruction U·M·V = D failed")
    nonzero = [d for d in dec.diag if d]
    if any(b % a for a, b in zip(nonzero, nonzero[1:])):
        raise KJClassError(f"invariant factors {nonzero} do not form a divisibility chain")
    for name, t in (("U", dec.U), ("V", dec.V)):
        if 0 < t.rows <= config.SMALL_DET_CHECK and abs(sympy.Matrix(t.to_dense()).det()) != 1:
            raise KJClassError(f"{name} is not unimodular")


@dataclass
class Solution:
    x: Optional[List[int]]
    # index into U·b witnessing that no solution exists
    obstruction: Optional[int] = None


def solve_with(dec: SmithDecomposition, b: Sequence[int]) -> Solution:
    m = dec.source
    if len(b) != m.rows:
        raise DimensionError(f"right-hand side of length {len(b)} for a matrix with {m.rows} rows")
    c = dec.U.apply(list(b))
    y = [0] * m.cols
    for i, ci in enumerate(c):
        d = dec.diag[i] if i < len(dec.diag) else 0
        if d == 0:
            if ci:
                return Solution(None, i)
        elif ci % d:
            return Solution(None, i)
        else:
            y[i] = ci // d
    x = dec.V.apply(y)
    if m.apply(x) != list(b):
        raise KJClassError("integer solution failed substitution check")
    return Solution(x)


def solve_integer(m: SparseIntMatrix, b: Sequence[int]) -> Optional[List[int]]:
    return solve_with(smith(m), b).x
