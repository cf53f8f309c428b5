import numpy as np
import pytest

from uniclass.channels import kraus_from_env_vector
from uniclass.generate import (
    block_diag_A,
    haar_unitary,
    haar_vector,
    named_examples,
    product_unitary,
)
from uniclass.mixed import (
    diagonal_forms,
    is_commuting_normal,
    span_unitarity_search,
    unimodular_bound,
)

MIXED = named_examples()["mixed_4x2"]


def grid_oracle(resolution=400):
    """max over a grid of min/max |l_j| for Diag(z, w, (z+w)/sqrt2, (z-iw)/sqrt2)."""
    a = np.linspace(0, np.pi / 2, resolution)
    phi = np.linspace(0, 2 * np.pi, 2 * resolution, endpoint=False)
    aa, pp = np.meshgrid(a, phi, indexing="ij")
    z = np.cos(aa)
    w = np.sin(aa) * np.exp(1j * pp)
    vals = np.abs(np.stack([z, w, (z + w) / np.sqrt(2), (z - 1j * w) / np.sqrt(2)]))
    return float(np.max(vals.min(axis=0) / vals.max(axis=0)))


def test_mixed_4x2_span_is_the_displayed_family():
    mats = kraus_from_env_vector(MIXED, [1, 0])
    assert is_commuting_normal(mats)
    s = 1 / np.sqrt(2)
    z, w = 0.3 - 0.2j, 1.1 + 0.5j
    combo = z * mats[0] + w * mats[1]
    assert np.allclose(combo, np.diag([z, w, s * (z + w), s * (z - 1j * w)]))


def test_mixed_4x2_bound_against_grid_oracle():
    forms, _ = diagonal_forms(kraus_from_env_vector(MIXED, [1, 0]))
    rows = {tuple(np.round(r, 6)) for r in forms}
    s = round(1 / np.sqrt(2), 6)
    assert rows == {(1, 0), (0, 1), (s, s), (s, -s * 1j)}
    bound = unimodular_bound(forms)
    oracle = grid_oracle()
    assert oracle < 0.999
    # grid values and the feasible point are both lower bounds on the maximum
    assert abs(bound.lower - oracle) < 5e-3
    assert bound.upper >= max(oracle, bound.lower)
    assert bound.upper < 0.999 and bound.converged


def test_bound_detects_unimodular_points():
    # forms of a span that contains a unitary: Diag(z, w, (z + w)/sqrt2 * ...)
    forms = np.array([[1, 0], [0, 1], [1 / np.sqrt(2), 1j / np.sqrt(2)]])
    bound = unimodular_bound(forms)
    assert bound.upper >= 1 - 1e-9
    forms = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert unimodular_bound(forms).lower > 1 - 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_search_finds_unitary_in_block_diag_spans(seed):
    u = block_diag_A(3, 3, seed=seed)
    for f in (np.eye(3)[0], haar_vector(3, seed + 10)):
        assert span_unitarity_search(kraus_from_env_vector(u, f))["ratio"] > 1 - 1e-6


def test_search_on_generic_span():
    rng_mats = [haar_unitary(3, 1) @ np.diag([1, 0.2, 0.1]), haar_unitary(3, 2) @ np.diag([0.3, 1, 0])]
    res = span_unitarity_search(rng_mats, budget=4)
    assert 0 <= res["ratio"] <= 1
    assert len(res["transcript"]) >= 1


def test_product_span_contains_unitary():
    u = product_unitary(3, 2, 1)
    mats = kraus_from_env_vector(u, haar_vector(2, 3))
    assert is_commuting_normal(mats) or span_unitarity_search(mats)["ratio"] > 1 - 1e-6
