import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uniclass.blocksvd import (
    BlockSVD,
    NotBlockDiagonalError,
    NotCommutingFamilyError,
    canonicalize,
    commutator_violations,
    compute_block_svd,
    expand,
    has_block_svd,
    joint_diagonalize,
)
from uniclass.generate import (
    block_diag_B,
    circulant_unitary,
    complex_gaussian,
    haar_unitary,
    make_rng,
    named_examples,
    product_unitary,
    sample_block_diag_A,
)
from uniclass.matcore import BipartiteOperator, max_norm, swap_factors

from conftest import haar_op

NO_SVD = named_examples()["no_block_svd_4x4"]


def brute_force_criterion(x, tol=1e-8):
    """Direct loop over all pairs of both block families."""
    blocks = expand(x).blocks
    left = [a @ b.conj().T for a in blocks for b in blocks]
    right = [a.conj().T @ b for a in blocks for b in blocks]
    for fam in (left, right):
        for m in fam:
            if np.max(np.abs(m @ m.conj().T - m.conj().T @ m)) > tol:
                return False
        for m1, m2 in itertools.combinations(fam, 2):
            if np.max(np.abs(m1 @ m2 - m2 @ m1)) > tol:
                return False
    return True


def test_expand_matrix_units_are_blocks():
    x = haar_op(2, 3, 1)
    exp = expand(x)
    assert np.allclose(exp.blocks[1], x.mat[0:3, 3:6])
    assert np.allclose(exp.reconstruct(), x.mat)


def test_expand_arbitrary_basis_reconstructs():
    x = haar_op(2, 2, 2)
    v = haar_unitary(4, 3)
    basis = [v[:, i].reshape(2, 2) for i in range(4)]
    assert np.allclose(expand(x, basis).reconstruct(), x.mat)
    with pytest.raises(ValueError):
        expand(x, [2 * b for b in basis])


def test_4x4_matrix_without_block_svd():
    check = has_block_svd(NO_SVD)
    assert not check
    assert check.witness["kind"] == "commutator"
    # X_11 X_22* and X_12 X_22* do not commute (0-based indices 0, 3 and 1, 3)
    named = [v for v in commutator_violations(NO_SVD)
             if v["family"] == "left" and v["indices"] == (0, 3, 1, 3)]
    assert named and named[0]["norm"] > 0.5
    blocks = expand(NO_SVD).blocks
    a = blocks[0] @ blocks[3].conj().T
    b = blocks[1] @ blocks[3].conj().T
    assert max_norm(a @ b - b @ a) > 0.5
    with pytest.raises(NotBlockDiagonalError) as info:
        compute_block_svd(NO_SVD)
    assert info.value.witness == check.witness


def test_criterion_agrees_with_brute_force():
    cases = [haar_op(2, 2, s) for s in range(5)]
    cases += [sample_block_diag_A(2, 3, seed=s).operator for s in range(5)]
    cases += [block_diag_B(2, 3, seed=s) for s in range(5)]
    cases += [NO_SVD]
    for x in cases:
        assert bool(has_block_svd(x)) == brute_force_criterion(x)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(1, 3), (2, 2), (2, 3), (3, 2), (3, 4)]), st.integers(0, 2**32),
       st.integers(1, 4))
def test_block_diag_round_trip(shape, seed, p):
    n, k = shape
    p = min(p, k) if n > 1 else 1
    s = sample_block_diag_A(n, k, p, seed)
    d = compute_block_svd(s.operator)
    assert len(d) == p
    assert np.allclose(d.reconstruct(), s.operator.mat, atol=1e-10)
    projs_final = [t.isom @ t.isom.conj().T for t in d.terms]
    projs_init = [t.isom.conj().T @ t.isom for t in d.terms]
    for group in (projs_final, projs_init):
        assert np.allclose(sum(group), np.eye(k), atol=1e-9)
        for a, b in itertools.combinations(group, 2):
            assert np.allclose(a @ b, 0, atol=1e-9)
    for t in d.terms:
        assert np.allclose(t.coeff @ t.coeff.conj().T, np.eye(n), atol=1e-9)


def test_canonical_form_is_unique_across_constructions():
    s = sample_block_diag_A(3, 4, p=2, seed=8)
    u = s.operator
    c1 = canonicalize(compute_block_svd(u, seed=1))
    c2 = canonicalize(compute_block_svd(u, seed=2))
    # same operator built with permuted directions and rephased coefficients
    perm = [3, 2, 1, 0]
    phase = np.exp(0.7j)
    mat = sum(np.kron(phase * s.coeffs[s.labels[i]],
                      np.outer(s.e[:, i], s.f[:, i].conj()) / phase) for i in perm)
    c3 = canonicalize(compute_block_svd(BipartiteOperator(mat, 3, 4)))
    for other in (c2, c3):
        assert len(other) == len(c1)
        for a, b in zip(c1.terms, other.terms):
            assert max_norm(a.coeff - b.coeff) < 1e-8
            assert max_norm(a.isom - b.isom) < 1e-8


def test_block_svd_json_round_trip():
    d = compute_block_svd(sample_block_diag_A(2, 3, seed=3).operator)
    back = BlockSVD.from_dict(d.to_dict())
    assert np.allclose(back.reconstruct(), d.reconstruct())


def test_product_gives_one_term():
    assert len(compute_block_svd(product_unitary(3, 2, 4))) == 1


def test_haar_sample_has_no_block_svd():
    for s in range(5):
        assert not has_block_svd(haar_op(2, 3, s))


def test_circulant_is_block_diagonal_on_b():
    x = BipartiteOperator(circulant_unitary(6, seed=2), 2, 3)
    assert has_block_svd(swap_factors(x))


def test_non_unitary_block_matrix():
    rng = make_rng(5)
    a, b = complex_gaussian(rng, (2, 2)), complex_gaussian(rng, (2, 2))
    e = haar_unitary(3, 1)
    r1 = np.outer(e[:, 0], e[:, 1].conj())
    r2 = np.outer(e[:, 2], e[:, 0].conj())
    x = BipartiteOperator(np.kron(a, r1) + np.kron(b, r2), 2, 3)
    d = compute_block_svd(x)
    assert len(d) == 2 and np.allclose(d.reconstruct(), x.mat)


def test_joint_diagonalize():
    v = haar_unitary(4, 0)
    fam = [v @ np.diag(d) @ v.conj().T for d in ([1, 1, 2, 2], [1, 3, 1, 3], [1j, 1j, 1j, 1j])]
    projs = joint_diagonalize(fam)
    assert len(projs) == 4
    assert np.allclose(sum(projs), np.eye(4))
    with pytest.raises(NotCommutingFamilyError):
        joint_diagonalize([np.array([[0, 1], [1, 0]]), np.diag([1, -1])])
