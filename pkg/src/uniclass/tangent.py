"""Tangent-space and variety dimension counts.

The enveloping tangent space of ``U_unital`` at ``U`` is the intersection
of the tangent spaces of the unitary group at ``U`` and of the partially
transposed unitary group at ``U``.  At a block-diagonal point
``U = sum_i U_i (x) e_i f_i*`` its real dimension is
``sum_{i,j} sum_x d_x^2`` where ``d_x`` are eigenvalue multiplicities of
``U_i U_j*``.  All counts here are real dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .blocksvd import compute_block_svd
from .generate import complex_gaussian, haar_unitary, make_rng
from .matcore import (
    DEFAULT_TOL,
    BipartiteOperator,
    Tolerances,
    cluster_values,
    is_unitary,
    numeric_rank,
    partial_transpose_B,
)

__all__ = [
    "NotUnitalMemberError",
    "SpectrumProfile",
    "DimensionReport",
    "VarietyDimensions",
    "spectrum_profile",
    "is_generic_position",
    "enveloping_dim_analytic",
    "enveloping_dim_numeric",
    "enveloping_report",
    "block_coefficients",
    "variety_dim_formulas",
    "mblockdiag_dim_numeric",
]


class NotUnitalMemberError(ValueError):
    """The operator or its partial transpose is not unitary."""


@dataclass(frozen=True)
class SpectrumProfile:
    """Clustered spectrum of a unitary: ``(eigenvalue, multiplicity)`` pairs."""

    pairs: tuple[tuple[complex, int], ...]

    @property
    def multiplicities(self) -> list[int]:
        return [d for _, d in self.pairs]

    def square_sum(self) -> int:
        return sum(d * d for _, d in self.pairs)


def spectrum_profile(x, tol: Tolerances = DEFAULT_TOL) -> SpectrumProfile:
    evals = np.linalg.eigvals(np.asarray(x, dtype=np.complex128))
    groups = cluster_values(evals, tol.spec_tol)
    return SpectrumProfile(tuple((complex(evals[g].mean()), len(g)) for g in groups))


def _check_blocks(blocks, tol):
    blocks = [np.asarray(b, dtype=np.complex128) for b in blocks]
    if not blocks:
        raise ValueError("need at least one block")
    for b in blocks:
        if not is_unitary(b, tol):
            raise ValueError("every block must be unitary")
    return blocks


def enveloping_dim_analytic(blocks, tol: Tolerances = DEFAULT_TOL) -> int:
    """``sum_{i,j} sum_x d_x^2`` over the clustered spectra of ``U_i U_j*``.

    Parameters
    ----------
    blocks : sequence of (n, n) unitary arrays
        One unitary per environment direction, repeated as in the
        decomposition ``sum_i U_i (x) e_i f_i*``.
    """
    blocks = _check_blocks(blocks, tol)
    return sum(
        spectrum_profile(a @ b.conj().T, tol).square_sum() for a in blocks for b in blocks
    )


def is_generic_position(blocks, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff every ``U_i U_j*`` with ``i != j`` has a simple spectrum."""
    blocks = _check_blocks(blocks, tol)
    n = blocks[0].shape[0]
    return all(
        len(spectrum_profile(a @ b.conj().T, tol).pairs) == n
        for i, a in enumerate(blocks)
        for j, b in enumerate(blocks)
        if i != j
    )


def _constraint_matrix(u: BipartiteOperator) -> np.ndarray:
    """Real matrix of ``A -> (U A* + A U*, G B* + B G*)`` with ``G = U^Gamma``, ``B = A^Gamma``.

    Columns run over the real coordinates ``(Re A_pq, Im A_pq)``; rows over
    ``(Re, Im)`` of both outputs.
    """
    n, k, d = u.n, u.k, u.dim
    g = partial_transpose_B(u).mat
    units = np.eye(d * d, dtype=np.complex128).reshape(d * d, d, d)
    dirs = np.concatenate([units, 1j * units])
    dirs_g = dirs.reshape(-1, n, k, n, k).transpose(0, 1, 4, 3, 2).reshape(-1, d, d)
    c1 = u.mat @ dirs.conj().transpose(0, 2, 1) + dirs @ u.mat.conj().T
    c2 = g @ dirs_g.conj().transpose(0, 2, 1) + dirs_g @ g.conj().T
    rows = np.concatenate(
        [c1.real.reshape(len(dirs), -1), c1.imag.reshape(len(dirs), -1),
         c2.real.reshape(len(dirs), -1), c2.imag.reshape(len(dirs), -1)],
        axis=1,
    )
    return rows.T


def enveloping_dim_numeric(u: BipartiteOperator, tol: Tolerances = DEFAULT_TOL) -> int:
    """Real dimension of ``{A : U A* + A U* = 0, U^G (A^G)* + A^G (U^G)* = 0}``.

    ``G`` denotes the partial transpose on the second factor.

    Raises
    ------
    NotUnitalMemberError
        If ``U`` or ``U^G`` is not unitary.
    """
    if not is_unitary(u.mat, tol) or not is_unitary(partial_transpose_B(u).mat, tol):
        raise NotUnitalMemberError("operator is not in the unital class")
    m = _constraint_matrix(u)
    return m.shape[1] - numeric_rank(m, tol)


@dataclass(frozen=True)
class DimensionReport:
    analytic: int
    numeric: int
    params: dict = field(default_factory=dict)

    @property
    def agree(self) -> bool:
        return self.analytic == self.numeric

    def to_dict(self) -> dict:
        return {"analytic": int(self.analytic), "numeric": int(self.numeric),
                "agree": self.agree, "params": self.params}


def enveloping_report(u: BipartiteOperator, blocks, tol: Tolerances = DEFAULT_TOL,
                      params=None) -> DimensionReport:
    """Compare the spectral count for ``blocks`` with the kernel dimension at ``u``."""
    return DimensionReport(
        enveloping_dim_analytic(blocks, tol),
        enveloping_dim_numeric(u, tol),
        dict(params or {}, n=u.n, k=u.k, generic=is_generic_position(blocks, tol)),
    )


def block_coefficients(u: BipartiteOperator, tol: Tolerances = DEFAULT_TOL) -> list:
    """Per-direction unitaries ``U_i`` of a block-diagonal ``u``.

    Each coefficient of the block SVD is repeated once per unit of rank of
    its partial isometry.

    Raises
    ------
    NotBlockDiagonalError
        If ``u`` has no block SVD.
    """
    d = compute_block_svd(u, tol)
    out = []
    for t in d.terms:
        out.extend([t.coeff] * numeric_rank(t.isom, tol))
    return out


@dataclass(frozen=True)
class VarietyDimensions:
    """Closed-form real dimensions; ``conjectured_dim_U_unital`` is unproven."""

    n: int
    k: int
    dim_U_block_diag_A: int
    dim_intersection: int
    dim_M_block_diag_A: int
    conjectured_dim_U_unital: int
    conjectural: tuple[str, ...] = ("conjectured_dim_U_unital",)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "dim_U_block_diag_A": self.dim_U_block_diag_A,
            "dim_intersection": self.dim_intersection,
            "dim_M_block_diag_A": self.dim_M_block_diag_A,
            "conjectured_dim_U_unital": self.conjectured_dim_U_unital,
            "conjecture": {name: True for name in self.conjectural},
        }


def variety_dim_formulas(n: int, k: int) -> VarietyDimensions:
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    block_a = k * k if n == 1 else k * (n * n + 2 * k - 2)
    if min(n, k) == 1:
        inter = (n * k) ** 2
    else:
        inter = 2 * n * n + 2 * k * k + n * k - 2 * n - 2 * k
    return VarietyDimensions(
        n, k,
        dim_U_block_diag_A=block_a,
        dim_intersection=inter,
        dim_M_block_diag_A=2 * k * (n * n + k - 1),
        conjectured_dim_U_unital=k * n * n + n * k * k - n * k,
    )


def _phi(a, e, f):
    """``sum_i a_i (x) e_i f_i*`` for stacked ``a`` (k, n, n) and bases ``e``, ``f`` as columns."""
    outer = np.einsum("si,ti->ist", e, f.conj())
    n, k = a.shape[1], e.shape[0]
    return np.einsum("iab,ist->asbt", a, outer).reshape(n * k, n * k)


def _anti_hermitian_basis(k):
    out = []
    for p in range(k):
        h = np.zeros((k, k), dtype=np.complex128)
        h[p, p] = 1j
        out.append(h)
        for q in range(p + 1, k):
            h = np.zeros((k, k), dtype=np.complex128)
            h[p, q], h[q, p] = 1, -1
            out.append(h)
            h = np.zeros((k, k), dtype=np.complex128)
            h[p, q] = h[q, p] = 1j
            out.append(h)
    return out


def _directions(a):
    """Real tangent directions ``(dA, He, Hf)`` at the parameter point."""
    kk, n, _ = a.shape
    zero_a = np.zeros_like(a)
    zero_h = np.zeros((kk, kk), dtype=np.complex128)
    for unit in (1.0, 1j):
        for i in range(kk):
            for p in range(n):
                for q in range(n):
                    d = zero_a.copy()
                    d[i, p, q] = unit
                    yield d, zero_h, zero_h
    for h in _anti_hermitian_basis(kk):
        yield zero_a, h, zero_h
        yield zero_a, zero_h, h


def _jacobian(a, e, f):
    cols = []
    for da, he, hf in _directions(a):
        cols.append((_phi(da, e, f) + _phi(a, e @ he, f) + _phi(a, e, f @ hf)).reshape(-1))
    m = np.array(cols).T
    return np.vstack([m.real, m.imag])


def _fd_jacobian(a, e, f, step):
    base = _phi(a, e, f)
    cols = []
    for da, he, hf in _directions(a):
        moved = _phi(a + step * da, e @ expm(step * he), f @ expm(step * hf))
        cols.append(((moved - base) / step).reshape(-1))
    m = np.array(cols).T
    return np.vstack([m.real, m.imag])


def mblockdiag_dim_numeric(
    n: int, k: int, seed=0, tol: Tolerances = DEFAULT_TOL, method: str = "exact",
    step: float = 1e-6,
) -> int:
    """Real rank of the differential of ``((A_i), (e_i), (f_i)) -> sum_i A_i (x) e_i f_i*``.

    ``(e_i)`` and ``(f_i)`` range over orthonormal bases of ``C^k`` (tangent
    directions ``e H`` with ``H`` anti-Hermitian) and the ``A_i`` over
    ``M_n``.  The point is seeded and random, with distinct ``A_i``.
    ``method`` is ``"exact"`` (analytic differential of the multilinear
    map) or ``"fd"`` (forward differences with step ``step``, ranked with a
    relative cutoff of ``100 * step``).
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    rng = make_rng(seed)
    a = complex_gaussian(rng, (k, n, n))
    e = haar_unitary(k, rng)
    f = haar_unitary(k, rng)
    if method == "exact":
        return numeric_rank(_jacobian(a, e, f), tol)
    if method == "fd":
        jac = _fd_jacobian(a, e, f, step)
        sv = np.linalg.svd(jac, compute_uv=False)
        return int(np.sum(sv > 100 * step * sv[0]))
    raise ValueError("method must be 'exact' or 'fd'")
