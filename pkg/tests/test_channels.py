import numpy as np
import pytest

from uniclass.channels import (
    NotUnitaryError,
    StinespringChannel,
    apply,
    apply_kraus,
    check_kraus,
    choi,
    choi_of,
    is_eb_channel_qubit,
    is_ppt_channel,
    is_unital_for,
    kraus_from_env_vector,
    state_spanning_set,
    stinespring_map,
)
from uniclass.generate import haar_unitary, haar_vector, random_density
from uniclass.matcore import BipartiteOperator, DimensionError, is_psd, matrix_units
from uniclass.verdicts import NO, UNKNOWN, YES

from conftest import haar_op, naive_channel, naive_choi


@pytest.mark.parametrize("shape", [(2, 2), (2, 3), (3, 2)])
def test_channel_matches_naive_definition(shape):
    u = haar_op(*shape, 1)
    beta = random_density(shape[1], seed=2)
    rho = random_density(shape[0], seed=3)
    ch = StinespringChannel(u, beta)
    assert np.allclose(ch(rho), naive_channel(u, rho, beta))
    assert np.allclose(choi(ch), naive_choi(u, beta))


def test_channel_is_cptp():
    u = haar_op(3, 2, 4)
    ch = StinespringChannel(u, random_density(2, seed=5))
    c = choi(ch)
    assert is_psd(c)
    # trace preservation: partial trace over the output factor is the identity
    assert np.allclose(np.einsum("iaja->ij", c.reshape(3, 3, 3, 3)), np.eye(3))


def test_kraus_agree_with_stinespring():
    u = haar_op(2, 3, 6)
    f = haar_vector(3, 7)
    kraus = kraus_from_env_vector(u, f)
    assert check_kraus(kraus)
    ch = StinespringChannel(u, np.outer(f, f.conj()))
    rho = random_density(2, seed=8)
    assert np.allclose(apply_kraus(kraus, rho), ch(rho))
    basis = haar_unitary(3, 9)
    rotated = kraus_from_env_vector(u, f, basis)
    assert np.allclose(apply_kraus(rotated, rho), ch(rho))


def test_kraus_input_validation():
    u = haar_op(2, 2, 0)
    with pytest.raises(ValueError):
        kraus_from_env_vector(u, [1.0, 1.0])
    with pytest.raises(DimensionError):
        kraus_from_env_vector(u, [1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        kraus_from_env_vector(u, [1.0, 0.0], basis=2 * np.eye(2))


def test_channel_rejects_bad_inputs():
    u = haar_op(2, 2, 0)
    with pytest.raises(NotUnitaryError):
        StinespringChannel(BipartiteOperator(2 * np.eye(4), 2, 2), np.eye(2) / 2)
    with pytest.raises(ValueError):
        StinespringChannel(u, np.diag([1.5, -0.5]))
    with pytest.raises(DimensionError):
        StinespringChannel(u, np.eye(3) / 3)


def test_bilinear_extension_is_linear_in_beta():
    u = haar_op(2, 2, 11)
    x = random_density(2, seed=1)
    b1, b2 = random_density(2, seed=2), random_density(2, seed=3)
    lhs = stinespring_map(u, x, 0.3 * b1 + 0.7j * b2)
    rhs = 0.3 * stinespring_map(u, x, b1) + 0.7j * stinespring_map(u, x, b2)
    assert np.allclose(lhs, rhs)
    assert np.allclose(choi_of(u, b1), naive_choi(u, b1))


def test_state_spanning_set_spans():
    for k in (1, 2, 3, 4):
        states = state_spanning_set(k)
        assert len(states) == k * k
        m = np.array([s.reshape(-1) for s in states])
        assert np.linalg.matrix_rank(m) == k * k


def test_identity_channel_properties():
    u = BipartiteOperator(np.eye(4), 2, 2)
    ch = StinespringChannel(u, np.diag([1.0, 0.0]))
    assert is_unital_for(ch)
    assert not is_ppt_channel(ch)
    assert is_eb_channel_qubit(ch) is NO


def test_eb_qubit_only_for_qubits():
    ch = StinespringChannel(haar_op(3, 2, 0), np.eye(2) / 2)
    assert is_eb_channel_qubit(ch) is UNKNOWN


def test_replacement_channel_is_eb():
    from uniclass.generate import const_unitary

    u = const_unitary(2, 1, 3)
    ch = StinespringChannel(u, random_density(2, seed=4))
    assert is_eb_channel_qubit(ch) is YES
    outs = [apply(ch, e) for e in matrix_units(2)]
    assert np.allclose(outs[1], 0) and np.allclose(outs[0], outs[3])


def test_channel_round_trip():
    ch = StinespringChannel(haar_op(2, 2, 1), random_density(2, seed=1))
    back = StinespringChannel.from_dict(ch.to_dict())
    assert np.allclose(back.beta, ch.beta)
    assert np.allclose(back.u.mat, ch.u.mat)
