"""Block-diagonal singular value decompositions ``X = sum_i X_i (x) R_i``.

``X`` is expanded against an orthonormal basis ``{E_a}`` of ``M_n(C)`` as
``X = sum_a E_a (x) X_a`` with ``X_a = [Tr (x) id]((E_a* (x) I) X)``.  A block
SVD exists iff both families ``{X_a X_b*}`` and ``{X_a* X_b}`` consist of
pairwise commuting normal matrices; when it does, the joint eigenprojectors
of the two families are the final and initial projections of the partial
isometries ``R_i``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .generate import complex_gaussian, make_rng
from .matcore import (
    DEFAULT_TOL,
    BipartiteOperator,
    DimensionError,
    Tolerances,
    cluster_values,
    cmatrix_from_dict,
    cmatrix_to_dict,
    matrix_units,
    max_norm,
    singular_values,
)

__all__ = [
    "NotBlockDiagonalError",
    "PairingAmbiguityError",
    "NotCommutingFamilyError",
    "BlockTerm",
    "BlockSVD",
    "BlockBasisExpansion",
    "BlockSVDCheck",
    "expand",
    "block_families",
    "has_block_svd",
    "commutator_violations",
    "joint_diagonalize",
    "compute_block_svd",
    "canonicalize",
]


class NotBlockDiagonalError(ValueError):
    """The operator has no block SVD; ``witness`` explains why."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class PairingAmbiguityError(ValueError):
    """Final and initial eigenprojectors cannot be matched one-to-one."""


class NotCommutingFamilyError(ValueError):
    """A family passed to :func:`joint_diagonalize` is not commuting and normal."""


@dataclass(frozen=True)
class BlockTerm:
    coeff: np.ndarray = field(repr=False)
    isom: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {"coeff": cmatrix_to_dict(self.coeff), "isom": cmatrix_to_dict(self.isom)}


@dataclass(frozen=True)
class BlockSVD:
    n: int
    k: int
    terms: tuple[BlockTerm, ...]

    def __len__(self):
        return len(self.terms)

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((self.n * self.k,) * 2, dtype=np.complex128)
        for t in self.terms:
            out += np.kron(t.coeff, t.isom)
        return out

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "terms": [t.to_dict() for t in self.terms]}

    @classmethod
    def from_dict(cls, data: dict) -> "BlockSVD":
        terms = tuple(
            BlockTerm(cmatrix_from_dict(t["coeff"]), cmatrix_from_dict(t["isom"]))
            for t in data["terms"]
        )
        return cls(int(data["n"]), int(data["k"]), terms)


@dataclass(frozen=True)
class BlockBasisExpansion:
    basis: list
    blocks: list

    def reconstruct(self) -> np.ndarray:
        return sum(np.kron(e, x) for e, x in zip(self.basis, self.blocks))


@dataclass(frozen=True)
class BlockSVDCheck:
    """Verdict of :func:`has_block_svd`; truthy iff a block SVD exists."""

    ok: bool
    witness: dict | None = None

    def __bool__(self):
        return self.ok


def _check_basis(basis, n, tol):
    if len(basis) != n * n:
        raise ValueError(f"basis must contain n^2 = {n * n} matrices")
    flat = np.array([np.asarray(b, dtype=np.complex128).reshape(-1) for b in basis])
    if flat.shape[1] != n * n:
        raise DimensionError("basis elements must be n x n")
    if max_norm(flat.conj() @ flat.T - np.eye(n * n)) > tol.eq_tol:
        raise ValueError("basis is not Hilbert-Schmidt orthonormal")
    return [f.reshape(n, n) for f in flat]


def expand(
    x: BipartiteOperator, basis=None, tol: Tolerances = DEFAULT_TOL
) -> BlockBasisExpansion:
    """Blocks ``X_a = [Tr (x) id]((E_a* (x) I_k) x)`` for an orthonormal basis.

    The default basis is the matrix units ``e_i e_j*``, for which ``X_(i,j)``
    is simply the ``(i, j)`` block of ``x``.
    """
    if basis is None:
        basis = matrix_units(x.n)
    else:
        basis = _check_basis(basis, x.n, tol)
    t = x.tensor4()
    blocks = [np.einsum("ij,isjt->st", e.conj(), t) for e in basis]
    return BlockBasisExpansion(list(basis), blocks)


def block_families(blocks) -> tuple[np.ndarray, np.ndarray]:
    """``left[a, b] = X_a X_b*`` and ``right[a, b] = X_a* X_b`` as 4-d arrays."""
    xs = np.asarray(blocks)
    left = np.einsum("aij,blj->abil", xs, xs.conj())
    right = np.einsum("aji,bjl->abil", xs.conj(), xs)
    return left, right


def _family_defects(fam: np.ndarray):
    """Normality defects per member and commutator norms per member pair."""
    m = fam.shape[0]
    members = fam.reshape(m * m, *fam.shape[2:])
    adj = members.conj().transpose(0, 2, 1)
    normal = np.max(np.abs(members @ adj - adj @ members), axis=(1, 2))
    prod = np.einsum("pij,qjl->pqil", members, members)
    comm = np.max(np.abs(prod - prod.transpose(1, 0, 2, 3)), axis=(2, 3))
    return normal.reshape(m, m), comm.reshape(m, m, m, m)


def _threshold(blocks, tol):
    scale = max([1.0] + [max_norm(b) for b in blocks])
    return tol.eq_tol * scale**4


def commutator_violations(
    x: BipartiteOperator, tol: Tolerances = DEFAULT_TOL, basis=None
) -> list[dict]:
    """Every failure of the block-SVD criterion, in lexicographic order.

    Each entry has ``family`` (``"left"`` for ``X_a X_b*``, ``"right"`` for
    ``X_a* X_b``), ``kind`` (``"commutator"`` or ``"normality"``),
    ``indices`` and ``norm``.  Commutator entries with indices
    ``(a, b, c, d)`` refer to the pair ``(X_a X_b*, X_c X_d*)`` (or the right
    family analogue) with ``(a, b) < (c, d)``.
    """
    blocks = expand(x, basis, tol).blocks
    thr = _threshold(blocks, tol)
    out = []
    for name, fam in zip(("left", "right"), block_families(blocks)):
        normal, comm = _family_defects(fam)
        m = fam.shape[0]
        for idx in zip(*np.nonzero(comm > thr)):
            a, b, c, d = (int(v) for v in idx)
            if (a, b) < (c, d):
                out.append(
                    {"family": name, "kind": "commutator", "indices": (a, b, c, d),
                     "norm": float(comm[a, b, c, d])}
                )
        for a in range(m):
            for b in range(m):
                if normal[a, b] > thr:
                    out.append(
                        {"family": name, "kind": "normality", "indices": (a, b),
                         "norm": float(normal[a, b])}
                    )
    out.sort(key=lambda v: (v["kind"] != "commutator", v["family"] != "left", v["indices"]))
    return out


def has_block_svd(
    x: BipartiteOperator, tol: Tolerances = DEFAULT_TOL, basis=None
) -> BlockSVDCheck:
    """Decide whether ``x`` admits a block-diagonal SVD over the ``B`` factor.

    On failure the witness is the first commutator violation (smallest index
    tuple, left family first), or a normality violation when all pairs
    commute.
    """
    violations = commutator_violations(x, tol, basis)
    if not violations:
        return BlockSVDCheck(True, None)
    witness = dict(violations[0])
    witness["violation_count"] = len(violations)
    return BlockSVDCheck(False, witness)


def _projector_key(p):
    return tuple(-np.round(np.real(np.diag(p)), 8))


def _split(members, vecs, tol, rng, depth=0):
    """Recursively split the column space of ``vecs`` into joint eigenspaces."""
    r = vecs.shape[1]
    restricted = []
    for m in members:
        mv = m @ vecs
        b = vecs.conj().T @ mv
        if max_norm(mv - vecs @ b) > tol.eq_tol:
            raise NotCommutingFamilyError("family does not leave its joint eigenspaces invariant")
        restricted.append(b)
    if r == 1 or all(max_norm(b - np.trace(b) / r * np.eye(r)) <= tol.eq_tol for b in restricted):
        return [vecs]
    if depth > 8:
        raise NotCommutingFamilyError("could not separate joint eigenspaces")
    coef = complex_gaussian(rng, len(restricted))
    h = sum(c.real * (b + b.conj().T) + c.imag * 1j * (b - b.conj().T) for c, b in zip(coef, restricted))
    h = (h + h.conj().T) / 2
    evals, w = np.linalg.eigh(h)
    clusters = cluster_values(evals, tol.spec_tol * max(1.0, np.max(np.abs(evals))))
    if len(clusters) == 1:
        raise NotCommutingFamilyError("family members are not simultaneously diagonalizable")
    out = []
    for idx in clusters:
        out.extend(_split(members, vecs @ w[:, idx], tol, rng, depth + 1))
    return out


def joint_diagonalize(family, tol: Tolerances = DEFAULT_TOL, seed=0) -> list[np.ndarray]:
    """Finest common eigenprojector resolution of a commuting normal family.

    A random Hermitian combination ``sum_f Re(c_f)(M_f + M_f*) +
    Im(c_f) i(M_f - M_f*)`` is diagonalised, and clusters are split further
    until every member is scalar on each.  Projectors are ordered by their
    diagonals (larger weight on earlier basis vectors first).

    Raises
    ------
    NotCommutingFamilyError
        If the members are not normal and pairwise commuting within tolerance.
    """
    members = [np.asarray(m, dtype=np.complex128) for m in family]
    if not members:
        raise ValueError("family is empty")
    d = members[0].shape[0]
    scale = max(max_norm(m) for m in members)
    if scale == 0:
        return [np.eye(d, dtype=np.complex128)]
    members = [m / scale for m in members]
    rng = make_rng(seed)
    spaces = _split(members, np.eye(d, dtype=np.complex128), tol, rng)
    projectors = [v @ v.conj().T for v in spaces]
    for m in members:
        approx = sum(np.trace(p @ m) / np.trace(p).real * p for p in projectors)
        if max_norm(approx - m) > 10 * tol.eq_tol:
            raise NotCommutingFamilyError("family is not jointly diagonal on the computed projectors")
    projectors.sort(key=_projector_key)
    return projectors


def _is_phase_multiple(a, b, tol):
    """Return ``c`` with ``|c| = 1`` and ``a = c b`` within tolerance, else None."""
    nb = np.vdot(b, b).real
    if nb == 0:
        return None
    c = np.vdot(b, a) / nb
    if abs(abs(c) - 1) > 1e3 * tol.eq_tol:
        return None
    if max_norm(a - c * b) > 10 * tol.eq_tol * max(1.0, max_norm(b)):
        return None
    return c / abs(c)


def compute_block_svd(x: BipartiteOperator, tol: Tolerances = DEFAULT_TOL, seed=0) -> BlockSVD:
    """Construct the block SVD of ``x``.

    Terms whose coefficient matrices agree up to a unimodular phase are
    merged, and terms with vanishing coefficients are dropped, so for a
    unitary ``x`` the result is the unique decomposition up to phases and
    ordering (see :func:`canonicalize`).

    Raises
    ------
    NotBlockDiagonalError
        If ``x`` fails the commutation criterion.
    PairingAmbiguityError
        If eigenprojectors of the two families cannot be matched.
    """
    check = has_block_svd(x, tol)
    if not check:
        raise NotBlockDiagonalError("operator has no block SVD", check.witness)
    exp = expand(x)
    blocks = exp.blocks
    xscale = max(max_norm(b) for b in blocks)
    if xscale == 0:
        return BlockSVD(x.n, x.k, ())
    thr = tol.eq_tol * xscale
    left, right = block_families(blocks)
    m = len(blocks)
    p_list = joint_diagonalize(left.reshape(m * m, x.k, x.k), tol, seed)
    q_list = joint_diagonalize(right.reshape(m * m, x.k, x.k), tol, seed)
    p_act = [p for p in p_list if max(max_norm(p @ b) for b in blocks) > thr]
    q_act = [q for q in q_list if max(max_norm(b @ q) for b in blocks) > thr]
    if len(p_act) != len(q_act):
        raise PairingAmbiguityError(
            f"{len(p_act)} final projectors but {len(q_act)} initial projectors"
        )
    # pair P_i with Q_j through the largest block first, then all blocks together
    a_star = int(np.argmax([np.linalg.norm(b) for b in blocks]))
    single = np.array([[np.linalg.norm(p @ blocks[a_star] @ q) for q in q_act] for p in p_act])
    aggregate = np.array(
        [[sum(np.linalg.norm(p @ b @ q) ** 2 for b in blocks) for q in q_act] for p in p_act]
    )
    pairing = []
    for i in range(len(p_act)):
        hits = np.nonzero(single[i] > thr)[0]
        if len(hits) != 1:
            hits = np.nonzero(aggregate[i] > thr**2)[0]
        if len(hits) != 1:
            raise PairingAmbiguityError(f"final projector {i} matches {len(hits)} initial projectors")
        pairing.append(int(hits[0]))
    if len(set(pairing)) != len(pairing):
        raise PairingAmbiguityError("two final projectors share an initial projector")

    terms: list[BlockTerm] = []
    for i, j in enumerate(pairing):
        p, q = p_act[i], q_act[j]
        pieces = [p @ b @ q for b in blocks]
        a_i = int(np.argmax([np.linalg.norm(c) for c in pieces]))
        sv = singular_values(pieces[a_i])
        rank = int(round(np.trace(p).real))
        if sv[rank - 1] < sv[0] * (1 - 1e3 * tol.eq_tol) - thr:
            raise PairingAmbiguityError("matched block is not a multiple of a partial isometry")
        isom = pieces[a_i] / sv[0]
        norm2 = np.vdot(isom, isom).real
        lam = [np.vdot(isom, b) / norm2 for b in blocks]
        coeff = sum(l * e for l, e in zip(lam, exp.basis))
        terms.append(BlockTerm(coeff, isom))

    merged: list[BlockTerm] = []
    for t in terms:
        for idx, s in enumerate(merged):
            c = _is_phase_multiple(t.coeff, s.coeff, tol)
            if c is not None:
                merged[idx] = BlockTerm(s.coeff, s.isom + c * t.isom)
                break
        else:
            merged.append(t)
    merged = [t for t in merged if max_norm(t.coeff) > tol.eq_tol]

    out = BlockSVD(x.n, x.k, tuple(merged))
    err = max_norm(out.reconstruct() - x.mat)
    if err > 10 * tol.eq_tol * max(1.0, xscale):
        raise RuntimeError(f"block SVD reconstruction error {err:.3e} exceeds tolerance")
    return out


def _cmp_close(a: float, b: float, eps: float) -> int:
    if abs(a - b) <= eps:
        return 0
    return -1 if a < b else 1


def canonicalize(d: BlockSVD, tol: Tolerances = DEFAULT_TOL) -> BlockSVD:
    """Fix the phase gauge and the term order of a block SVD.

    Each coefficient matrix is rotated so that its largest-magnitude entry
    (first in row-major order among near-ties) is real positive, the
    conjugate phase moving into the isometry.  Terms are sorted by
    decreasing Hilbert-Schmidt norm, then lexicographically by entries.
    """
    eps = 1e3 * tol.eq_tol
    fixed = []
    for t in d.terms:
        flat = t.coeff.reshape(-1)
        mags = np.abs(flat)
        top = mags.max()
        if top == 0:
            fixed.append(t)
            continue
        idx = int(np.nonzero(mags >= top * (1 - 1e-6))[0][0])
        phase = flat[idx] / mags[idx]
        fixed.append(BlockTerm(t.coeff / phase, t.isom * phase))

    def cmp(s: BlockTerm, t: BlockTerm) -> int:
        c = _cmp_close(np.linalg.norm(t.coeff), np.linalg.norm(s.coeff), eps)
        if c:
            return c
        for a, b in zip(s.coeff.reshape(-1), t.coeff.reshape(-1)):
            c = _cmp_close(a.real, b.real, eps) or _cmp_close(a.imag, b.imag, eps)
            if c:
                return c
        return 0

    fixed.sort(key=functools.cmp_to_key(cmp))
    return BlockSVD(d.n, d.k, tuple(fixed))
