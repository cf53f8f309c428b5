"""Dense complex linear algebra and bipartite structural primitives.

Operators on ``C^n (x) C^k`` are stored as ``(n*k, n*k)`` complex arrays using
the Kronecker index convention: row ``i*k + s`` holds system index ``i`` and
environment index ``s``.  Every function here is pure and never mutates its
arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "BipartiteOperator",
    "DimensionError",
    "NotNormalError",
    "as_cmatrix",
    "max_norm",
    "hs_inner",
    "tensor",
    "partial_trace_B",
    "partial_transpose_B",
    "flip",
    "swap_factors",
    "is_unitary",
    "is_psd",
    "is_hermitian",
    "spectral_decomp",
    "cluster_values",
    "singular_values",
    "rank_cutoff",
    "numeric_rank",
    "realign",
    "operator_schmidt",
    "matrix_units",
    "cmatrix_to_dict",
    "cmatrix_from_dict",
]


class DimensionError(ValueError):
    """Raised when matrix dimensions are incompatible with an operation."""


class NotNormalError(ValueError):
    """Raised when a normal matrix is required but ``x x* != x* x``."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every test in the package.

    Parameters
    ----------
    eq_tol : float
        Entrywise (max-norm) threshold for matrix equalities.
    spec_tol : float
        Distance below which two eigenvalues are put in the same cluster.
    rank_tol_factor : float
        Multiplier of ``max(rows, cols) * sigma_max * eps`` in the rank cutoff.
    """

    eq_tol: float = 1e-9
    spec_tol: float = 1e-7
    rank_tol_factor: float = 100.0

    def __post_init__(self):
        for name in ("eq_tol", "spec_tol", "rank_tol_factor"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


DEFAULT_TOL = Tolerances()


def as_cmatrix(x, name: str = "matrix") -> np.ndarray:
    """Return ``x`` as a finite 2-d complex128 array (copying only if needed)."""
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must have positive dimensions")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _square(x, name="matrix") -> np.ndarray:
    arr = as_cmatrix(x, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class BipartiteOperator:
    """An ``nk x nk`` matrix acting on ``C^n (x) C^k``."""

    mat: np.ndarray = field(repr=False)
    n: int
    k: int

    def __post_init__(self):
        if int(self.n) < 1 or int(self.k) < 1:
            raise DimensionError("n and k must be positive")
        mat = as_cmatrix(self.mat, "operator")
        d = self.n * self.k
        if mat.shape != (d, d):
            raise DimensionError(
                f"operator of shape {mat.shape} does not match n*k = {d}"
            )
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, self.k

    @property
    def dim(self) -> int:
        return self.n * self.k

    def tensor4(self) -> np.ndarray:
        """View as an ``(n, k, n, k)`` tensor ``x[i, s, j, t]``."""
        return self.mat.reshape(self.n, self.k, self.n, self.k)

    def dagger(self) -> "BipartiteOperator":
        return BipartiteOperator(self.mat.conj().T, self.n, self.k)

    def __matmul__(self, other):
        if isinstance(other, BipartiteOperator):
            if other.shape != self.shape:
                raise DimensionError("bipartite shapes differ")
            return BipartiteOperator(self.mat @ other.mat, self.n, self.k)
        return BipartiteOperator(self.mat @ np.asarray(other), self.n, self.k)

    def to_dict(self) -> dict:
        out = cmatrix_to_dict(self.mat)
        out["n"] = self.n
        out["k"] = self.k
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "BipartiteOperator":
        try:
            n, k = int(data["n"]), int(data["k"])
        except KeyError as exc:
            raise ValueError(f"bipartite operator JSON lacks field {exc}") from None
        return cls(cmatrix_from_dict(data), n, k)


def cmatrix_to_dict(x) -> dict:
    """Serialise a matrix to ``{"rows", "cols", "re", "im"}`` (row-major)."""
    arr = as_cmatrix(x)
    return {
        "rows": int(arr.shape[0]),
        "cols": int(arr.shape[1]),
        "re": arr.real.ravel().tolist(),
        "im": arr.imag.ravel().tolist(),
    }


def cmatrix_from_dict(data: dict) -> np.ndarray:
    try:
        rows, cols = int(data["rows"]), int(data["cols"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros(rows * cols)), dtype=float)
    except KeyError as exc:
        raise ValueError(f"matrix JSON lacks field {exc}") from None
    if re.size != rows * cols or im.size != rows * cols:
        raise ValueError("matrix JSON entry count does not match rows * cols")
    return as_cmatrix((re + 1j * im).reshape(rows, cols))


def max_norm(x) -> float:
    """Largest absolute entry."""
    x = np.asarray(x)
    return float(np.max(np.abs(x))) if x.size else 0.0


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``Tr(a* b)``."""
    return complex(np.vdot(np.asarray(a), np.asarray(b)))


def tensor(a, b) -> np.ndarray:
    """Kronecker product; block ``(i, j)`` of the result is ``a[i, j] * b``."""
    return np.kron(as_cmatrix(a, "a"), as_cmatrix(b, "b"))


def partial_trace_B(x: BipartiteOperator) -> np.ndarray:
    """Trace out the environment factor: ``[id (x) Tr](x)``."""
    return np.einsum("isjs->ij", x.tensor4())


def partial_transpose_B(x: BipartiteOperator) -> BipartiteOperator:
    """Transpose each ``k x k`` block in place (``X^Gamma``)."""
    t = x.tensor4().transpose(0, 3, 2, 1)
    return BipartiteOperator(t.reshape(x.dim, x.dim), x.n, x.k)


def swap_factors(x: BipartiteOperator) -> BipartiteOperator:
    """Conjugate by the factor swap ``C^n (x) C^k -> C^k (x) C^n``.

    The result has shape ``(k, n)`` and satisfies
    ``swap_factors(A (x) B) == B (x) A``.
    """
    t = x.tensor4().transpose(1, 0, 3, 2)
    return BipartiteOperator(t.reshape(x.dim, x.dim), x.k, x.n)


def flip(n: int) -> np.ndarray:
    """The flip ``F_n``: ``F_n (x (x) y) = y (x) x`` on ``C^n (x) C^n``."""
    if n < 1:
        raise DimensionError("n must be positive")
    f = np.zeros((n, n, n, n), dtype=np.complex128)
    idx = np.arange(n)
    f[idx[:, None], idx[None, :], idx[None, :], idx[:, None]] = 1.0
    return f.reshape(n * n, n * n)


def is_unitary(x, tol: Tolerances = DEFAULT_TOL) -> bool:
    x = _square(x)
    eye = np.eye(x.shape[0])
    return (
        max_norm(x @ x.conj().T - eye) <= tol.eq_tol
        and max_norm(x.conj().T @ x - eye) <= tol.eq_tol
    )


def is_hermitian(x, tol: Tolerances = DEFAULT_TOL) -> bool:
    x = _square(x)
    return max_norm(x - x.conj().T) <= tol.eq_tol


def is_psd(x, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Hermitian within ``eq_tol`` and smallest eigenvalue ``>= -eq_tol``."""
    x = _square(x)
    if not is_hermitian(x, tol):
        return False
    h = (x + x.conj().T) / 2
    return bool(np.linalg.eigvalsh(h)[0] >= -tol.eq_tol)


def cluster_values(values, threshold: float) -> list[np.ndarray]:
    """Single-linkage clusters of complex numbers.

    Two values share a cluster iff they are joined by a chain of steps of
    length at most ``threshold``.  Returns index arrays sorted by the
    ``(real, imag)`` order of the cluster means.
    """
    values = np.asarray(values, dtype=np.complex128).ravel()
    m = values.size
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    close = np.abs(values[:, None] - values[None, :]) <= threshold
    for a, b in zip(*np.nonzero(np.triu(close, 1))):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
    groups: dict[int, list[int]] = {}
    for a in range(m):
        groups.setdefault(find(a), []).append(a)
    clusters = [np.array(g) for g in groups.values()]
    clusters.sort(key=lambda g: (values[g].mean().real, values[g].mean().imag))
    return clusters


def spectral_decomp(x, tol: Tolerances = DEFAULT_TOL) -> list[tuple[complex, np.ndarray]]:
    """Eigenvalue/projector pairs of a normal matrix.

    Eigenvalues closer than ``tol.spec_tol`` (single linkage) are merged and
    reported as the cluster mean.  The pairs are sorted by ``(Re, Im)``.

    Raises
    ------
    NotNormalError
        If ``x x* - x* x`` exceeds ``tol.eq_tol`` in max-norm.
    """
    x = _square(x)
    scale = max(1.0, max_norm(x)) ** 2
    if max_norm(x @ x.conj().T - x.conj().T @ x) > tol.eq_tol * scale:
        raise NotNormalError("matrix is not normal")
    if is_hermitian(x, Tolerances(eq_tol=0.0)):
        evals, vecs = np.linalg.eigh(x)
        evals = evals.astype(np.complex128)
    else:
        # Schur form of a normal matrix is diagonal
        t, vecs = sla.schur(x, output="complex")
        evals = np.diag(t)
    out = []
    for idx in cluster_values(evals, tol.spec_tol):
        v = vecs[:, idx]
        out.append((complex(evals[idx].mean()), v @ v.conj().T))
    return out


def singular_values(x) -> np.ndarray:
    """Singular values in nonincreasing order."""
    return np.linalg.svd(as_cmatrix(x), compute_uv=False)


def rank_cutoff(sv, shape, tol: Tolerances = DEFAULT_TOL) -> float:
    sv = np.asarray(sv)
    smax = float(sv[0]) if sv.size else 0.0
    if smax == 0.0:
        return tol.rank_tol_factor * np.finfo(float).eps
    return tol.rank_tol_factor * max(shape) * smax * np.finfo(float).eps


def numeric_rank(x, tol: Tolerances = DEFAULT_TOL) -> int:
    """Number of singular values above the relative cutoff.

    The cutoff is ``rank_tol_factor * max(rows, cols) * sigma_max * eps``,
    or ``rank_tol_factor * eps`` when ``x`` vanishes.
    """
    x = as_cmatrix(x) if np.iscomplexobj(x) else np.asarray(x, dtype=float)
    sv = np.linalg.svd(x, compute_uv=False)
    return int(np.sum(sv > rank_cutoff(sv, x.shape, tol)))


def realign(x: BipartiteOperator) -> np.ndarray:
    """Realignment ``R[(i, j), (s, t)] = x[(i, s), (j, t)]`` of size ``n^2 x k^2``."""
    return x.tensor4().transpose(0, 2, 1, 3).reshape(x.n**2, x.k**2)


def operator_schmidt(
    x: BipartiteOperator, tol: Tolerances = DEFAULT_TOL
) -> list[tuple[float, np.ndarray, np.ndarray]]:
    """Operator-Schmidt decomposition ``x = sum_i w_i a_i (x) b_i``.

    The ``a_i`` (resp. ``b_i``) are Hilbert-Schmidt orthonormal and the
    weights are nonincreasing; weights below the numerical rank cutoff of
    the realigned matrix are discarded.
    """
    r = realign(x)
    u, s, vh = np.linalg.svd(r)
    cut = rank_cutoff(s, r.shape, tol)
    terms = []
    for i in range(s.size):
        if s[i] <= cut:
            break
        a = u[:, i].reshape(x.n, x.n)
        b = vh[i, :].reshape(x.k, x.k)
        terms.append((float(s[i]), a, b))
    return terms


def matrix_units(n: int) -> list[np.ndarray]:
    """The ``n^2`` matrix units ``e_i e_j*`` in row-major order of ``(i, j)``."""
    units = []
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=np.complex128)
            e[i, j] = 1.0
            units.append(e)
    return units
