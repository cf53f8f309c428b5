"""Seeded constructors for labelled test operators.

Randomness comes from NumPy's Philox-4x64 counter-based bit generator;
Gaussians are produced by the Box-Muller transform on its uniform stream, so
a seed fixes every sample independently of NumPy's normal sampler.  Any
function taking ``seed`` also accepts a ``numpy.random.Generator`` so that
compound constructions draw from one stream.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .matcore import DEFAULT_TOL, BipartiteOperator, Tolerances, flip, swap_factors

__all__ = [
    "PRNG_NAME",
    "make_rng",
    "gaussian",
    "complex_gaussian",
    "haar_unitary",
    "haar_vector",
    "random_density",
    "product_unitary",
    "BlockDiagSample",
    "sample_block_diag_A",
    "block_diag_A",
    "block_diag_B",
    "const_unitary",
    "circulant_unitary",
    "BothBlockSample",
    "sample_both_block",
    "both_block",
    "pv_projection",
    "b_not_a_n3",
    "eb_example",
    "named_examples",
    "GENERATORS",
]

PRNG_NAME = "philox4x64-boxmuller-v1"


def make_rng(seed) -> np.random.Generator:
    """Generator for ``seed`` (an unsigned 64-bit int), or ``seed`` itself if already one."""
    if isinstance(seed, np.random.Generator):
        return seed
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(seed))


def gaussian(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normal samples by Box-Muller."""
    size = tuple(np.atleast_1d(size))
    count = int(np.prod(size))
    half = (count + 1) // 2
    u1 = 1.0 - rng.random(half)  # in (0, 1]
    u2 = rng.random(half)
    rad = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([rad * np.cos(2 * np.pi * u2), rad * np.sin(2 * np.pi * u2)])
    return z[:count].reshape(size)


def complex_gaussian(rng: np.random.Generator, size) -> np.ndarray:
    """Standard complex normal entries (``E|z|^2 = 1``)."""
    g = gaussian(rng, (2,) + tuple(np.atleast_1d(size)))
    return (g[0] + 1j * g[1]) / np.sqrt(2)


def haar_unitary(d: int, seed=0) -> np.ndarray:
    """Haar-distributed ``d x d`` unitary: QR of a Ginibre matrix with phase fix."""
    if d < 1:
        raise ValueError("d must be positive")
    rng = make_rng(seed)
    z = complex_gaussian(rng, (d, d))
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    phases = diag / np.abs(diag)
    return q * phases[None, :]


def haar_vector(d: int, seed=0) -> np.ndarray:
    rng = make_rng(seed)
    v = complex_gaussian(rng, d)
    return v / np.linalg.norm(v)


def random_density(k: int, rank: int | None = None, seed=0) -> np.ndarray:
    """``G G* / Tr(G G*)`` with ``G`` a ``k x rank`` complex Gaussian matrix."""
    rank = k if rank is None else rank
    if not 1 <= rank <= k:
        raise ValueError("rank must satisfy 1 <= rank <= k")
    g = complex_gaussian(make_rng(seed), (k, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def product_unitary(n: int, k: int, seed=0) -> BipartiteOperator:
    """``V (x) W`` with independent Haar factors."""
    rng = make_rng(seed)
    v = haar_unitary(n, rng)
    w = haar_unitary(k, rng)
    return BipartiteOperator(np.kron(v, w), n, k)


class BlockDiagSample(NamedTuple):
    """``U = sum_i coeffs[labels[i]] (x) e_i f_i*`` with ``e``, ``f`` as columns."""

    operator: BipartiteOperator
    coeffs: list
    labels: np.ndarray
    e: np.ndarray
    f: np.ndarray

    @property
    def blocks(self) -> list:
        """The ``k`` per-basis-vector unitaries (with repetition)."""
        return [self.coeffs[j] for j in self.labels]


def _distinct_unitaries(n, p, rng, tol):
    out = []
    while len(out) < p:
        cand = haar_unitary(n, rng)
        if all(abs(np.trace(cand @ u.conj().T)) < n - tol.spec_tol for u in out):
            out.append(cand)
    return out


def sample_block_diag_A(
    n: int, k: int, p: int | None = None, seed=0, tol: Tolerances = DEFAULT_TOL
) -> BlockDiagSample:
    """A block-diagonal unitary with ``p`` pairwise non-equivalent coefficients.

    The ``k`` basis directions are split into ``p`` nonempty groups, the
    first ``p`` directions seeding one group each and the rest assigned at
    random.
    """
    if p is None:
        p = k if n > 1 else 1
    if not 1 <= p <= k:
        raise ValueError("p must satisfy 1 <= p <= k")
    if n == 1 and p > 1:
        raise ValueError("for n = 1 all coefficients are phase equivalent, so p must be 1")
    rng = make_rng(seed)
    coeffs = _distinct_unitaries(n, p, rng, tol)
    labels = np.concatenate([np.arange(p), rng.integers(0, p, size=k - p)]).astype(int)
    e = haar_unitary(k, rng)
    f = haar_unitary(k, rng)
    mat = sum(np.kron(coeffs[labels[i]], np.outer(e[:, i], f[:, i].conj())) for i in range(k))
    return BlockDiagSample(BipartiteOperator(mat, n, k), coeffs, labels, e, f)


def block_diag_A(n: int, k: int, p: int | None = None, seed=0) -> BipartiteOperator:
    return sample_block_diag_A(n, k, p, seed).operator


def block_diag_B(n: int, k: int, p: int | None = None, seed=0) -> BipartiteOperator:
    """``sum_i e_i f_i* (x) U_i`` with ``U_i`` in ``U_k``; ``1 <= p <= n``."""
    return swap_factors(sample_block_diag_A(k, n, p, seed).operator)


def const_unitary(n: int, r: int, seed=0) -> BipartiteOperator:
    """``(I_n (x) V)(F_n (x) I_r)(I_n (x) W)`` on ``C^n (x) C^{nr}``."""
    if n < 1 or r < 1:
        raise ValueError("n and r must be positive")
    rng = make_rng(seed)
    k = n * r
    v = haar_unitary(k, rng)
    w = haar_unitary(k, rng)
    eye = np.eye(n)
    mat = np.kron(eye, v) @ np.kron(flip(n), np.eye(r)) @ np.kron(eye, w)
    return BipartiteOperator(mat, n, k)


def fourier_matrix(d: int) -> np.ndarray:
    idx = np.arange(d)
    return np.exp(2j * np.pi * np.outer(idx, idx) / d) / np.sqrt(d)


def circulant_unitary(d: int, seed=0, phases=None) -> np.ndarray:
    """``F_d diag(phases) F_d*``; the phases are random unless given."""
    if d < 1:
        raise ValueError("d must be positive")
    if phases is None:
        phases = np.exp(2j * np.pi * make_rng(seed).random(d))
    phases = np.asarray(phases, dtype=np.complex128)
    fd = fourier_matrix(d)
    return fd @ np.diag(phases) @ fd.conj().T


class BothBlockSample(NamedTuple):
    """``U = sum_ij lam[i, j] e_i f_i* (x) g_j h_j*`` (bases as columns)."""

    operator: BipartiteOperator
    lam: np.ndarray
    e: np.ndarray
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray


def sample_both_block(n: int, k: int, seed=0) -> BothBlockSample:
    rng = make_rng(seed)
    e, f = haar_unitary(n, rng), haar_unitary(n, rng)
    g, h = haar_unitary(k, rng), haar_unitary(k, rng)
    lam = np.exp(2j * np.pi * rng.random((n, k)))
    mat = np.zeros((n * k, n * k), dtype=np.complex128)
    for i in range(n):
        left = np.outer(e[:, i], f[:, i].conj())
        for j in range(k):
            mat += lam[i, j] * np.kron(left, np.outer(g[:, j], h[:, j].conj()))
    return BothBlockSample(BipartiteOperator(mat, n, k), lam, e, f, g, h)


def both_block(n: int, k: int, seed=0) -> BipartiteOperator:
    return sample_both_block(n, k, seed).operator


def pv_projection(n: int, r: int, seed=0, v=None) -> np.ndarray:
    """``(I_n (x) V)(omega omega* (x) I_r)(I_n (x) V)*`` on ``C^n (x) C^{nr}``.

    ``omega`` is the normalised maximally entangled vector of ``C^n (x) C^n``.
    This is the range projection of ``U^Gamma`` for constant-channel
    unitaries.
    """
    k = n * r
    if v is None:
        v = haar_unitary(k, seed)
    omega = np.eye(n).reshape(-1) / np.sqrt(n)
    left = np.kron(np.eye(n), v)
    return left @ np.kron(np.outer(omega, omega), np.eye(r)) @ left.conj().T


# Two non-commuting 2x2 unitaries, generated once (Philox seed 20240611) and frozen.
_FROZEN_V = np.array(
    [
        [-0.6028908644474349 + 0.2792080322347017j, -0.5229224338055611 - 0.5339640517153932j],
        [-0.717738582811728 - 0.20836700085393284j, 0.03897852930373387 + 0.6632610300265405j],
    ]
)
_FROZEN_W = np.array(
    [
        [0.40744329290044456 - 0.6448763023310682j, -0.5744818040353626 - 0.29680831287975457j],
        [-0.6461347135171651 + 0.02518828597467793j, -0.09553217237304751 - 0.7568018804676923j],
    ]
)


def b_not_a_n3(k: int = 2, seed=None, v=None, w=None) -> BipartiteOperator:
    """``e1 e1* (x) I + e2 e2* (x) V + e3 e3* (x) W`` with ``VW != WV``.

    Without a seed (and ``k = 2``) the frozen pair is used; with a seed, a
    non-commuting Haar pair is drawn.
    """
    if v is None or w is None:
        if seed is None and k == 2:
            v, w = _FROZEN_V, _FROZEN_W
        else:
            rng = make_rng(0 if seed is None else seed)
            while True:
                v, w = haar_unitary(k, rng), haar_unitary(k, rng)
                if np.max(np.abs(v @ w - w @ v)) > 1e-3:
                    break
    k = v.shape[0]
    units = np.eye(3)
    mat = (
        np.kron(np.diag(units[0]), np.eye(k))
        + np.kron(np.diag(units[1]), v)
        + np.kron(np.diag(units[2]), w)
    )
    return BipartiteOperator(mat, 3, k)


def eb_example(n: int = 2, p: int | None = None, seed=0) -> BipartiteOperator:
    """A block-diagonal unitary on ``C^n (x) C^n`` followed by the flip."""
    u = block_diag_A(n, n, p, seed)
    return BipartiteOperator(u.mat @ flip(n), n, n)


def _mixed_4x2() -> BipartiteOperator:
    s = 1 / np.sqrt(2)
    blocks = [
        np.eye(2),
        np.array([[0, 1], [1, 0]]),
        s * np.array([[1, 1], [1, -1]]),
        s * np.array([[1, 1j], [-1j, -1]]),
    ]
    mat = sum(np.kron(np.diag(np.eye(4)[i]), blocks[i]) for i in range(4))
    return BipartiteOperator(mat, 4, 2)


def _no_block_svd_4x4() -> BipartiteOperator:
    mat = np.array([[1, 0, 0, 1], [0, 2, 1, 0], [0, 1, 1, 0], [1, 0, 0, 1]], dtype=float)
    return BipartiteOperator(mat, 2, 2)


def named_examples(seed=0) -> dict[str, BipartiteOperator]:
    """Named example operators.

    ``mixed_4x2``
        Block-diagonal on ``B``, unital, yet with no unitary in a Kraus span.
    ``b_not_a_n3``
        Block-diagonal on ``B`` but not on ``A`` (frozen literals).
    ``b_not_a_n3_seeded``
        Same construction with a seeded non-commuting pair.
    ``no_block_svd_4x4``
        A non-unitary ``2 (x) 2`` matrix whose diagonal block products commute
        but which has no block SVD.
    ``eb_example``
        ``block_diag_A(2, 2) . F_2``.
    """
    return {
        "mixed_4x2": _mixed_4x2(),
        "b_not_a_n3": b_not_a_n3(),
        "b_not_a_n3_seeded": b_not_a_n3(2, seed=seed),
        "no_block_svd_4x4": _no_block_svd_4x4(),
        "eb_example": eb_example(2, seed=seed),
    }


def _haar_op(n, k, seed=0):
    return BipartiteOperator(haar_unitary(n * k, seed), n, k)


def _circulant_op(n, k, seed=0):
    return BipartiteOperator(circulant_unitary(n * k, seed), n, k)


def _const_op(n, k, seed=0):
    if k % n:
        raise ValueError(f"constant-channel unitaries need k divisible by n (n={n}, k={k})")
    return const_unitary(n, k // n, seed)


def _eb_op(n, k, seed=0, p=None):
    if n != k:
        raise ValueError("eb_example needs n == k")
    return eb_example(n, p, seed)


# name -> callable(n, k, seed, **params) returning a BipartiteOperator
GENERATORS = {
    "haar": _haar_op,
    "product": lambda n, k, seed=0: product_unitary(n, k, seed),
    "block_diag_A": lambda n, k, seed=0, p=None: block_diag_A(n, k, p, seed),
    "block_diag_B": lambda n, k, seed=0, p=None: block_diag_B(n, k, p, seed),
    "const": _const_op,
    "circulant": _circulant_op,
    "both_block": lambda n, k, seed=0: both_block(n, k, seed),
    "eb_example": _eb_op,
}
