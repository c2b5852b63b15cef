import itertools

import pytest

from models import config, intlinalg
from models.errors import DimensionError, ResourceLimitError
from models.intlinalg import SparseIntMatrix, _Reducer, smith, solve_integer, solve_with, verify_smith


def random_matrix(rng, rows, cols, density=0.4):
    return SparseIntMatrix(rows, cols, {
        (i, j): rng.randint(-3, 3) for i in range(rows) for j in range(cols) if rng.random() < density
    })


def test_invariant_factors():
    dec = smith(SparseIntMatrix.from_dense([[2, 4], [6, 8]]))
    assert dec.diag == [2, 4]
    assert dec.invariant_factors == [2, 4]
    verify_smith(dec)


def test_divisibility_fixed():
    dec = smith(SparseIntMatrix.from_dense([[2, 0], [0, 3]]))
    assert dec.diag == [1, 6]
    verify_smith(dec)


def test_rank_of_zero_and_empty():
    assert smith(SparseIntMatrix(3, 2)).rank == 0
    assert smith(SparseIntMatrix(0, 4)).rank == 0


def test_random_decompositions_reconstruct(rng):
    for _ in range(25):
        m = random_matrix(rng, rng.randint(1, 7), rng.randint(1, 7))
        dec = smith(m)
        assert dec.U @ m @ dec.V == dec.diagonal_matrix()
        verify_smith(dec)


def test_solve():
    m = SparseIntMatrix.from_dense([[2, 0], [0, 3]])
    assert solve_integer(m, [4, 9]) == [2, 3]
    assert solve_integer(m, [1, 0]) is None


def test_solve_reports_obstruction():
    m = SparseIntMatrix.from_dense([[1, 1], [1, 1]])
    solution = solve_with(smith(m), [1, 0])
    assert solution.x is None
    assert solution.obstruction is not None


def test_random_images_are_solvable(rng):
    for _ in range(25):
        m = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
        x = [rng.randint(-4, 4) for _ in range(m.cols)]
        solution = solve_integer(m, m.apply(x))
        assert solution is not None
        assert m.apply(solution) == m.apply(x)


def test_matmul_and_transpose():
    a = SparseIntMatrix.from_dense([[1, 2], [0, 1]])
    b = SparseIntMatrix.from_dense([[1, -2], [0, 1]])
    assert a @ b == SparseIntMatrix.identity(2)
    assert a.transpose().to_dense() == [[1, 0], [2, 1]]


def test_dimension_errors():
    with pytest.raises(DimensionError):
        SparseIntMatrix(2, 2, {(2, 0): 1})
    with pytest.raises(DimensionError):
        SparseIntMatrix(2, 3) @ SparseIntMatrix(2, 3)
    with pytest.raises(DimensionError):
        solve_integer(SparseIntMatrix(2, 2), [1])


def test_size_cap(monkeypatch):
    monkeypatch.setattr(config, "MAX_MATRIX_DIM", 3)
    with pytest.raises(ResourceLimitError):
        smith(SparseIntMatrix(4, 1))


def test_solvability_matches_exhaustive_search(rng):
    box = range(-5, 6)
    for _ in range(40):
        m = random_matrix(rng, rng.randint(1, 3), 3, density=0.6)
        b = [rng.randint(-4, 4) for _ in range(m.rows)]
        found = any(m.apply(list(x)) == b for x in itertools.product(box, repeat=3))
        x = solve_integer(m, b)
        if found:
            assert x is not None, (m.to_dense(), b)
        if x is not None:
            assert m.apply(x) == b


def test_pivot_prefers_no_fill_in():
    red = _Reducer(SparseIntMatrix.from_dense([[2, 0, 0], [0, 1, 1], [0, 1, 1]]))
    assert red.choose_pivot(0) == (0, 0)


def test_damping_pivot_prefers_small_entries():
    red = _Reducer(SparseIntMatrix.from_dense([[2, 0, 0], [0, 1, 1], [0, 1, 1]]))
    i, j = red.choose_pivot(0, damp=True)
    assert red.rows[i][j] == 1


def test_decompositions_with_damping_every_step(monkeypatch, rng):
    monkeypatch.setattr(intlinalg, "DAMPING_PERIOD", 1)
    for _ in range(15):
        m = random_matrix(rng, rng.randint(1, 7), rng.randint(1, 7))
        dec = smith(m)
        assert dec.U @ m @ dec.V == dec.diagonal_matrix()
        verify_smith(dec)
