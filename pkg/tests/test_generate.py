import numpy as np
import pytest

from uniclass.blocksvd import compute_block_svd, has_block_svd
from uniclass.channels import StinespringChannel
from uniclass.generate import (
    GENERATORS,
    b_not_a_n3,
    block_diag_A,
    circulant_unitary,
    const_unitary,
    gaussian,
    haar_unitary,
    make_rng,
    named_examples,
    product_unitary,
    pv_projection,
    random_density,
    sample_block_diag_A,
    sample_both_block,
)
from uniclass.matcore import DEFAULT_TOL, flip, is_psd, is_unitary, numeric_rank, swap_factors


def test_haar_unitary_is_unitary():
    for seed in range(100):
        assert is_unitary(haar_unitary(6, seed))
    assert abs(abs(haar_unitary(1, 3)[0, 0]) - 1) < 1e-12


def test_haar_trace_second_moment():
    vals = np.array([abs(np.trace(haar_unitary(4, s))) ** 2 for s in range(2000)])
    # E|Tr U|^2 = 1 for Haar U(d), d >= 2; the variance of |Tr U|^2 is 1 for d >= 4
    assert abs(vals.mean() - 1) < 3 * vals.std() / np.sqrt(len(vals))


def test_box_muller_moments():
    z = gaussian(make_rng(0), 200_000)
    assert abs(z.mean()) < 0.01 and abs(z.var() - 1) < 0.01


def test_determinism():
    for name, gen in GENERATORS.items():
        n, k = (2, 2)
        a, b = gen(n, k, seed=42), gen(n, k, seed=42)
        assert np.array_equal(a.mat, b.mat), name
        assert not np.array_equal(a.mat, gen(n, k, seed=43).mat), name


def test_seed_validation():
    with pytest.raises(ValueError):
        make_rng(-1)
    with pytest.raises(ValueError):
        make_rng(2**64)


def test_product_unitary_channel():
    u = product_unitary(2, 3, 5)
    v = u.mat.reshape(2, 3, 2, 3)[:, 0, :, 0]
    v = v / np.sqrt(abs(np.linalg.det(v)))
    for s in range(5):
        ch = StinespringChannel(u, random_density(3, seed=s))
        rho = random_density(2, seed=100 + s)
        out = ch(rho)
        # V rho V* up to the scalar absorbed into V
        expected = v @ rho @ v.conj().T
        assert np.allclose(out, expected / np.trace(expected))


def test_block_diag_sample_structure():
    s = sample_block_diag_A(3, 4, p=2, seed=1)
    assert is_unitary(s.operator.mat)
    assert sorted(set(s.labels)) == [0, 1]
    a, b = s.coeffs
    assert abs(np.trace(a @ b.conj().T)) < 3 - DEFAULT_TOL.spec_tol
    assert len(compute_block_svd(s.operator)) == 2
    with pytest.raises(ValueError):
        block_diag_A(2, 2, p=3)


def test_block_diag_p1_is_product():
    from uniclass.matcore import operator_schmidt

    assert len(operator_schmidt(block_diag_A(2, 3, p=1, seed=4))) == 1


def test_const_unitary_regrouping():
    u = const_unitary(2, 1, 6)
    assert u.shape == (2, 2) and is_unitary(u.mat)
    assert const_unitary(2, 2, 1).shape == (2, 4)
    # with r = 1, F_n U is a product
    from uniclass.matcore import BipartiteOperator, operator_schmidt

    assert len(operator_schmidt(BipartiteOperator(flip(2) @ u.mat, 2, 2))) == 1


def test_circulant_structure():
    assert np.allclose(circulant_unitary(2, phases=[1, 1]), np.eye(2))
    for d in (3, 4, 6):
        x = circulant_unitary(d, seed=d)
        assert is_unitary(x)
        for i in range(d):
            for j in range(d):
                assert np.isclose(x[i, j], x[0, (j - i) % d])


def test_both_block_sample():
    s = sample_both_block(2, 3, 1)
    assert is_unitary(s.operator.mat)
    assert np.allclose(abs(s.lam), 1)
    assert has_block_svd(s.operator) and has_block_svd(swap_factors(s.operator))


def test_random_density():
    for rank in (1, 2, 3):
        rho = random_density(3, rank, seed=rank)
        assert np.isclose(np.trace(rho), 1) and is_psd(rho)
        assert numeric_rank(rho) == rank
    with pytest.raises(ValueError):
        random_density(3, 4)


def test_pv_projection_is_projection():
    p = pv_projection(2, 2, seed=3)
    assert np.allclose(p, p.conj().T) and np.allclose(p @ p, p)
    assert np.isclose(np.trace(p).real, 2)


def test_counterexamples():
    ce = named_examples()
    assert set(ce) >= {"mixed_4x2", "b_not_a_n3", "no_block_svd_4x4", "eb_example"}
    assert is_unitary(ce["mixed_4x2"].mat)
    assert ce["mixed_4x2"].shape == (4, 2)
    assert not is_unitary(ce["no_block_svd_4x4"].mat)
    assert np.array_equal(ce["no_block_svd_4x4"].mat.real,
                          [[1, 0, 0, 1], [0, 2, 1, 0], [0, 1, 1, 0], [1, 0, 0, 1]])
    frozen = b_not_a_n3()
    v, w = frozen.mat[2:4, 2:4], frozen.mat[4:6, 4:6]
    assert np.max(np.abs(v @ w - w @ v)) > 0.5
    assert np.array_equal(frozen.mat, b_not_a_n3().mat)


def test_generator_errors():
    with pytest.raises(ValueError):
        GENERATORS["const"](2, 3)
    with pytest.raises(ValueError):
        GENERATORS["eb_example"](2, 3)
