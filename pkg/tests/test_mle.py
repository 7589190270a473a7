import itertools

import pytest

from matproof.field import BLS12_381_R, TOY97
from matproof.mle import (
    FieldMatrix, MlePoly, eq_table, evaluate, fix_col_vars, fix_first_var, fix_row_vars, from_evals,
    from_matrix, sum_over_hypercube,
)


def basis_sum(m: FieldMatrix, row_pt, col_pt):
    """Direct sum of entries times products of l0(t) = 1 - t and l1(t) = t."""
    params = m.params
    acc = params.zero()
    rb, cb = len(row_pt), len(col_pt)
    for i in range(m.rows):
        for j in range(m.cols):
            bits = [(i >> (rb - 1 - t)) & 1 for t in range(rb)] + [(j >> (cb - 1 - t)) & 1 for t in range(cb)]
            weight = params.one()
            for b, x in zip(bits, list(row_pt) + list(col_pt)):
                weight = weight * (x if b else 1 - x)
            acc = acc + m[i, j] * weight
    return acc


def test_from_matrix_examples(example):
    w, _, _ = example
    mle = from_matrix(w)
    assert mle.num_vars == 2 and [e.value for e in mle.evals] == [1, 2, 3, 4]
    one = from_matrix(FieldMatrix.from_ints([[7]], TOY97))
    assert one.num_vars == 0 and one.evals == (TOY97(7),)
    m = from_matrix(FieldMatrix.from_ints([[1, 2], [3, 4], [5, 6]], TOY97))
    assert m.num_vars == 3
    assert [e.value for e in m.evals] == [1, 2, 3, 4, 5, 6, 0, 0]


def test_worked_example_formulas(example):
    w, x, y = example
    F = BLS12_381_R
    assert evaluate(from_matrix(w), [F(2), F(3)]) == 1 + 2 * 2 + 3 == 8
    assert evaluate(from_matrix(w), [F(0), F(1)]) == 2
    assert evaluate(from_matrix(x), [F(3), F(4)]) == 5 + 2 * 3 + 4 == 15


def test_evaluate_length_mismatch():
    with pytest.raises(ValueError):
        evaluate(from_evals([1, 2, 3, 4], TOY97), [TOY97(1)])


def test_fix_first_var_examples():
    p = from_evals([1, 2, 3, 4], TOY97)
    assert [e.value for e in fix_first_var(p, TOY97(0)).evals] == [1, 2]
    assert [e.value for e in fix_first_var(p, TOY97(1)).evals] == [3, 4]
    fixed = fix_first_var(p, TOY97(2))
    assert [e.value for e in fixed.evals] == [5, 6]
    for t in range(5):
        assert evaluate(fixed, [TOY97(t)]) == evaluate(p, [TOY97(2), TOY97(t)])
    with pytest.raises(ValueError):
        fix_first_var(from_evals([3], TOY97), TOY97(1))


def test_sum_over_hypercube_examples(example):
    assert sum_over_hypercube(from_evals([1, 2, 3, 4], TOY97)) == 10
    assert sum_over_hypercube(from_evals([0] * 8, TOY97)) == 0


@pytest.mark.parametrize("rows,cols", [(r, c) for r in range(1, 9) for c in range(1, 9)])
def test_consistency_on_boolean_points(rows, cols, rng):
    m = FieldMatrix.random(rows, cols, BLS12_381_R, rng)
    mle = from_matrix(m)
    rb, cb = (rows - 1).bit_length(), (cols - 1).bit_length()
    for bits in itertools.product((0, 1), repeat=rb + cb):
        i = int("".join(map(str, bits[:rb])) or "0", 2)
        j = int("".join(map(str, bits[rb:])) or "0", 2)
        expected = m[i, j] if i < rows and j < cols else 0
        assert evaluate(mle, [BLS12_381_R(b) for b in bits]) == expected


def test_multilinear_in_each_variable(rng):
    F = BLS12_381_R
    m = FieldMatrix.random(4, 8, F, rng)
    mle = from_matrix(m)
    for v in range(mle.num_vars):
        pt = [F.random(rng) for _ in range(mle.num_vars)]
        vals = []
        for t in (0, 1, 2):
            pt[v] = F(t)
            vals.append(evaluate(mle, pt))
        assert vals[2] - vals[1] == vals[1] - vals[0]


def test_fix_first_var_commutes_with_evaluate(rng):
    F = BLS12_381_R
    for n in range(1, 7):
        poly = MlePoly(n, tuple(F.random(rng) for _ in range(1 << n)), F)
        pt = [F.random(rng) for _ in range(n)]
        assert evaluate(poly, pt) == evaluate(fix_first_var(poly, pt[0]), pt[1:])


def test_evaluate_matches_basis_sum(rng):
    F = BLS12_381_R
    for rows, cols in [(1, 1), (2, 3), (3, 5), (4, 4), (8, 2)]:
        m = FieldMatrix.random(rows, cols, F, rng)
        rb, cb = (rows - 1).bit_length(), (cols - 1).bit_length()
        rp = [F.random(rng) for _ in range(rb)]
        cp = [F.random(rng) for _ in range(cb)]
        assert evaluate(from_matrix(m), rp + cp) == basis_sum(m, rp, cp)
        assert evaluate(fix_row_vars(m, rp), cp) == basis_sum(m, rp, cp)
        assert evaluate(fix_col_vars(m, cp), rp) == basis_sum(m, rp, cp)


def test_eq_table_is_indicator_on_cube():
    F = TOY97
    for bits in itertools.product((0, 1), repeat=3):
        table = eq_table([F(b) for b in bits], F)
        idx = int("".join(map(str, bits)), 2)
        assert [e.value for e in table] == [1 if k == idx else 0 for k in range(8)]


def test_padding_keeps_matmul_sum(rng):
    F = BLS12_381_R
    w = FieldMatrix.random(3, 5, F, rng)
    x = FieldMatrix.random(5, 3, F, rng)
    y = w @ x
    ymle = from_matrix(y)
    for i in range(3):
        for j in range(3):
            total = sum((w[i, k] * x[k, j] for k in range(5)), F.zero())
            assert y[i, j] == total
            assert evaluate(ymle, [F((i >> 1) & 1), F(i & 1), F((j >> 1) & 1), F(j & 1)]) == total


def test_matrix_bytes_roundtrip(rng):
    m = FieldMatrix.random(3, 4, BLS12_381_R, rng)
    assert FieldMatrix.from_bytes(3, 4, m.to_bytes(), BLS12_381_R) == m
    with pytest.raises(ValueError):
        FieldMatrix(2, 2, (TOY97(1),) * 3, TOY97)
