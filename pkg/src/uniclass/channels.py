"""Stinespring channels ``L_{U,beta}(X) = Tr_B(U (X (x) beta) U*)``.

Choi matrices use the input-first convention
``C_L = sum_ij e_i e_j* (x) L(e_i e_j*)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matcore import (
    DEFAULT_TOL,
    BipartiteOperator,
    DimensionError,
    Tolerances,
    _square,
    cmatrix_to_dict,
    is_psd,
    is_unitary,
    max_norm,
    partial_transpose_B,
)
from .verdicts import NO, UNKNOWN, YES, Value

__all__ = [
    "NotUnitaryError",
    "StinespringChannel",
    "check_density",
    "stinespring_map",
    "apply",
    "choi",
    "choi_of",
    "kraus_from_env_vector",
    "apply_kraus",
    "check_kraus",
    "is_unital_for",
    "is_ppt_channel",
    "is_eb_channel_qubit",
    "state_spanning_set",
]


class NotUnitaryError(ValueError):
    """Raised when an interaction operator is not unitary within tolerance."""


def check_density(beta, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Validate a density matrix (PSD, unit trace) and return it as an array."""
    beta = _square(beta, "beta")
    if not is_psd(beta, tol):
        raise ValueError("beta is not positive semidefinite")
    if abs(np.trace(beta) - 1) > tol.eq_tol:
        raise ValueError("beta does not have unit trace")
    return beta


@dataclass(frozen=True)
class StinespringChannel:
    """The channel induced by a bipartite unitary ``u`` and environment state ``beta``."""

    u: BipartiteOperator
    beta: np.ndarray = field(repr=False)
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        if not is_unitary(self.u.mat, self.tol):
            raise NotUnitaryError("interaction operator is not unitary")
        beta = check_density(self.beta, self.tol)
        if beta.shape[0] != self.u.k:
            raise DimensionError(
                f"beta has dimension {beta.shape[0]}, environment has {self.u.k}"
            )
        object.__setattr__(self, "beta", beta)

    @property
    def n(self) -> int:
        return self.u.n

    def __call__(self, x) -> np.ndarray:
        return apply(self, x)

    def to_dict(self) -> dict:
        return {"u": self.u.to_dict(), "beta": cmatrix_to_dict(self.beta)}

    @classmethod
    def from_dict(cls, data: dict, tol: Tolerances = DEFAULT_TOL) -> "StinespringChannel":
        from .matcore import cmatrix_from_dict

        return cls(BipartiteOperator.from_dict(data["u"]), cmatrix_from_dict(data["beta"]), tol)


def stinespring_map(u: BipartiteOperator, x, b) -> np.ndarray:
    """Evaluate ``Tr_B(U (x (x) b) U*)`` for arbitrary (not necessarily positive) ``x``, ``b``.

    This is the bilinear extension used for exact spanning-set checks.
    """
    x = np.asarray(x, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if x.shape != (u.n, u.n) or b.shape != (u.k, u.k):
        raise DimensionError("input or environment matrix has the wrong size")
    t = u.tensor4()
    return np.einsum("asit,ij,tv,bsjv->ab", t, x, b, t.conj(), optimize=True)


def apply(ch: StinespringChannel, x) -> np.ndarray:
    """``L_{U,beta}(x)`` for an ``n x n`` matrix ``x``."""
    return stinespring_map(ch.u, x, ch.beta)


def choi_of(u: BipartiteOperator, b) -> np.ndarray:
    """Choi matrix of ``X -> Tr_B(U (X (x) b) U*)`` for any ``k x k`` matrix ``b``."""
    t = u.tensor4()
    b = np.asarray(b, dtype=np.complex128)
    c = np.einsum("asit,tv,bsjv->iajb", t, b, t.conj(), optimize=True)
    return c.reshape(u.n**2, u.n**2)


def choi(ch: StinespringChannel) -> np.ndarray:
    """``[id (x) L](Omega_n)`` with ``Omega_n = sum_ij e_i e_j* (x) e_i e_j*``."""
    return choi_of(ch.u, ch.beta)


def kraus_from_env_vector(
    u: BipartiteOperator,
    f,
    basis=None,
    tol: Tolerances = DEFAULT_TOL,
) -> list[np.ndarray]:
    """Kraus operators ``E_i = (I (x) e_i*) U (I (x) f)`` of ``L_{U, f f*}``.

    Parameters
    ----------
    u : BipartiteOperator
    f : array_like, shape (k,)
        Unit vector of the environment.
    basis : array_like, shape (k, k), optional
        Orthonormal basis ``e_i`` as columns; the canonical basis by default.
    """
    f = np.asarray(f, dtype=np.complex128).ravel()
    if f.size != u.k:
        raise DimensionError("f must have length k")
    if abs(np.linalg.norm(f) - 1) > tol.eq_tol:
        raise ValueError("f must be a unit vector")
    if basis is None:
        basis = np.eye(u.k, dtype=np.complex128)
    basis = np.asarray(basis, dtype=np.complex128)
    if basis.shape != (u.k, u.k):
        raise DimensionError("basis must be k x k")
    if max_norm(basis.conj().T @ basis - np.eye(u.k)) > tol.eq_tol:
        raise ValueError("basis is not orthonormal")
    t = u.tensor4()
    ops = np.einsum("si,asbt,t->iab", basis.conj(), t, f, optimize=True)
    return [ops[i] for i in range(u.k)]


def apply_kraus(kraus, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    return sum(e @ x @ e.conj().T for e in kraus)


def check_kraus(kraus, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff ``sum_i E_i* E_i = I`` within ``eq_tol``."""
    n = kraus[0].shape[1]
    total = sum(e.conj().T @ e for e in kraus)
    return max_norm(total - np.eye(n)) <= tol.eq_tol


def is_unital_for(ch: StinespringChannel, tol: Tolerances = DEFAULT_TOL) -> bool:
    return max_norm(apply(ch, np.eye(ch.n)) - np.eye(ch.n)) <= tol.eq_tol


def is_ppt_channel(ch: StinespringChannel, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff the partial transpose of the Choi matrix is PSD."""
    c = BipartiteOperator(choi(ch), ch.n, ch.n)
    return is_psd(partial_transpose_B(c).mat, tol)


def is_eb_channel_qubit(ch: StinespringChannel, tol: Tolerances = DEFAULT_TOL) -> Value:
    """Entanglement breaking test, decided only for qubit channels.

    For ``n = 2`` the Choi matrix lives on ``C^2 (x) C^2`` where a positive
    partial transpose is equivalent to separability.  Larger ``n`` gives
    ``UNKNOWN``.
    """
    if ch.n != 2:
        return UNKNOWN
    return YES if is_ppt_channel(ch, tol) else NO


def state_spanning_set(k: int) -> list[np.ndarray]:
    """``k^2`` pure states whose projectors span ``M_k(C)``.

    Basis projectors, plus ``(e_a + e_b)/sqrt2`` and ``(e_a + i e_b)/sqrt2``
    projectors for ``a < b``.
    """
    eye = np.eye(k, dtype=np.complex128)
    vecs = [eye[a] for a in range(k)]
    for a in range(k):
        for b in range(a + 1, k):
            vecs.append((eye[a] + eye[b]) / np.sqrt(2))
            vecs.append((eye[a] + 1j * eye[b]) / np.sqrt(2))
    return [np.outer(v, v.conj()) for v in vecs]
