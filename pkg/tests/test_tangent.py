import itertools

import numpy as np
import pytest

from uniclass.generate import (
    block_diag_B,
    const_unitary,
    haar_unitary,
    product_unitary,
    sample_block_diag_A,
)
from uniclass.matcore import BipartiteOperator, swap_factors
from uniclass.tangent import (
    NotUnitalMemberError,
    block_coefficients,
    enveloping_dim_analytic,
    enveloping_dim_numeric,
    enveloping_report,
    is_generic_position,
    mblockdiag_dim_numeric,
    spectrum_profile,
    variety_dim_formulas,
)


def i_plus_v(v):
    n = v.shape[0]
    mat = np.kron(np.eye(n), np.diag([1, 0])) + np.kron(v, np.diag([0, 1]))
    return BipartiteOperator(mat, n, 2)


def test_spectrum_profile():
    p = spectrum_profile(np.diag([1, 1, -1]))
    assert sorted(p.multiplicities) == [1, 2]
    assert p.square_sum() == 5


def test_product_point():
    for n, k in [(2, 2), (2, 3), (3, 2)]:
        blocks = [np.eye(n)] * k
        assert enveloping_dim_analytic(blocks) == (n * k) ** 2
        assert enveloping_dim_numeric(product_unitary(n, k, 1)) == (n * k) ** 2


def test_generic_formula():
    s = sample_block_diag_A(2, 3, seed=3)
    assert is_generic_position(s.blocks)
    report = enveloping_report(s.operator, s.blocks)
    assert report.analytic == report.numeric == 3 * 4 + 2 * 9 - 6


def test_identity_plus_v():
    v = haar_unitary(2, 5)
    assert enveloping_dim_numeric(i_plus_v(v)) == 12
    assert enveloping_dim_analytic([np.eye(2), v]) == 12
    w = np.diag([1, 1, -1.0])
    # repeated eigenvalue of V: 2 n^2 + 2 (2^2 + 1^2)
    assert enveloping_dim_analytic([np.eye(3), w]) == 2 * 9 + 2 * 5
    assert enveloping_dim_numeric(i_plus_v(w)) == 28


@pytest.mark.parametrize("n,k", list(itertools.product([2, 3], [2, 3])))
def test_numeric_agrees_with_analytic(n, k):
    for seed in range(4):
        p = 1 + seed % k
        s = sample_block_diag_A(n, k, p, seed)
        r = enveloping_report(s.operator, s.blocks)
        assert r.agree, (n, k, seed, r)
        assert r.analytic <= (n * k) ** 2


def test_b_side_matches_formula():
    for seed in range(3):
        s = sample_block_diag_A(3, 2, seed=seed)
        b = swap_factors(s.operator)
        assert enveloping_dim_numeric(b) == enveloping_dim_analytic(s.blocks)


def test_block_coefficients_from_operator():
    s = sample_block_diag_A(2, 3, p=2, seed=4)
    blocks = block_coefficients(s.operator)
    assert len(blocks) == 3
    assert enveloping_dim_analytic(blocks) == enveloping_dim_analytic(s.blocks)


def test_numeric_requires_unital_member():
    with pytest.raises(NotUnitalMemberError):
        enveloping_dim_numeric(const_unitary(2, 1, 0))


def test_formula_values():
    assert variety_dim_formulas(1, 3).dim_U_block_diag_A == 9
    assert variety_dim_formulas(2, 2).dim_M_block_diag_A == 20
    assert variety_dim_formulas(2, 3).dim_U_block_diag_A == 24
    assert variety_dim_formulas(1, 4).dim_intersection == 16
    assert variety_dim_formulas(3, 1).dim_intersection == 9
    d = variety_dim_formulas(2, 3).to_dict()
    assert d["conjecture"] == {"conjectured_dim_U_unital": True}


def test_generic_formula_symmetry():
    for n, k in itertools.product(range(1, 6), repeat=2):
        assert (variety_dim_formulas(n, k).conjectured_dim_U_unital
                == variety_dim_formulas(k, n).conjectured_dim_U_unital)
        if min(n, k) >= 2:
            assert (variety_dim_formulas(n, k).dim_intersection
                    == variety_dim_formulas(k, n).dim_intersection)


def test_product_point_dominates_generic_point():
    for n, k in [(2, 2), (2, 3), (3, 2), (3, 3)]:
        s = sample_block_diag_A(n, k, seed=1)
        assert enveloping_dim_analytic(s.blocks) <= (n * k) ** 2


@pytest.mark.parametrize("n,k", [(1, 1), (1, 3), (2, 2), (2, 3), (3, 2), (3, 3)])
def test_mblockdiag(n, k):
    expected = 2 * k * (n * n + k - 1)
    assert mblockdiag_dim_numeric(n, k, seed=1) == expected
    assert mblockdiag_dim_numeric(n, k, seed=1, method="fd") == expected


def test_mblockdiag_bad_method():
    with pytest.raises(ValueError):
        mblockdiag_dim_numeric(2, 2, method="spline")
