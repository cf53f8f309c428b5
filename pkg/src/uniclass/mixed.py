"""Searching Kraus operator spans for unitaries.

For a bipartite unitary ``U`` and unit vector ``f`` the operators
``E_i = (I (x) e_i*) U (I (x) f)`` span a space that must meet the unitary
group whenever every ``L_{U,beta}`` is mixed unitary.  Two tools decide that
question numerically:

* when the ``E_i`` commute and are normal, every span element is
  ``sum_j l_j(c) P_j`` for common eigenprojectors ``P_j``, and a unitary
  exists iff some ``c`` makes all ``|l_j(c)| = 1``.  :func:`unimodular_bound`
  brackets ``max min_j |l_j| s.t. max_j |l_j| <= 1`` with a certified
  branch-and-bound upper bound;
* otherwise :func:`span_unitarity_search` runs a multi-start local search
  for a scalar multiple of a unitary in the span (a heuristic).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .blocksvd import NotCommutingFamilyError, joint_diagonalize
from .generate import complex_gaussian, make_rng
from .matcore import DEFAULT_TOL, Tolerances, max_norm, numeric_rank

__all__ = [
    "is_commuting_normal",
    "diagonal_forms",
    "BoundResult",
    "unimodular_bound",
    "span_unitarity_search",
]


def is_commuting_normal(mats, tol: Tolerances = DEFAULT_TOL) -> bool:
    mats = [np.asarray(m) for m in mats]
    scale = max(1.0, max(max_norm(m) for m in mats)) ** 2
    for i, a in enumerate(mats):
        if max_norm(a @ a.conj().T - a.conj().T @ a) > tol.eq_tol * scale:
            return False
        for b in mats[i + 1:]:
            if max_norm(a @ b - b @ a) > tol.eq_tol * scale:
                return False
    return True


def diagonal_forms(mats, tol: Tolerances = DEFAULT_TOL, seed=0):
    """Linear forms of a commuting normal family.

    Returns ``(forms, projectors)`` where ``forms[j, i]`` is the eigenvalue
    of ``mats[i]`` on ``projectors[j]``, so that
    ``sum_i c_i mats[i] = sum_j (forms @ c)[j] projectors[j]``.
    """
    projectors = joint_diagonalize(mats, tol, seed)
    forms = np.array(
        [[np.trace(p @ m) / np.trace(p).real for m in mats] for p in projectors]
    )
    return forms, projectors


@dataclass
class BoundResult:
    """Bracket ``lower <= max min_j |w_j| <= upper`` over ``w`` in the form range."""

    upper: float
    lower: float
    best: np.ndarray = field(repr=False)
    boxes: int = 0
    converged: bool = False

    def to_dict(self) -> dict:
        return {
            "upper": float(self.upper),
            "lower": float(self.lower),
            "boxes": int(self.boxes),
            "converged": bool(self.converged),
        }


def _ratio(w):
    mags = np.abs(w)
    top = mags.max(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(top > 0, mags.min(axis=-1) / top, 0.0)
    return r


def _to_complex(z, m):
    """Real coordinates ``[x1, x2, y2, ..., xm, ym]`` to complex ``t`` (``t1`` real)."""
    t = np.zeros(z.shape[:-1] + (m,), dtype=np.complex128)
    t[..., 0] = z[..., 0]
    if m > 1:
        t[..., 1:] = z[..., 1::2] + 1j * z[..., 2::2]
    return t


def unimodular_bound(
    forms,
    tol: Tolerances = DEFAULT_TOL,
    budget: int = 8,
    seed=0,
    gap: float = 1e-3,
    batch: int = 512,
) -> BoundResult:
    """Bracket ``max_c min_j |l_j(c)|`` subject to ``max_j |l_j(c)| <= 1``.

    The value is 1 iff some ``c`` makes every form unimodular.  Writing the
    form values as ``w = B t`` with ``B`` an orthonormal basis of the range,
    a global phase fixes ``t_1 >= 0`` and feasibility bounds ``|t| <= sqrt(q)``.
    Boxes in the remaining real coordinates are bounded using
    ``| |w_j(t)| - |w_j(t0)| | <= |B_j| |t - t0|``, and are refined best-first
    until the bracket closes to ``gap``, a unimodular point is found
    (``lower >= 1 - eq_tol``), or ``5000 * budget`` boxes have been examined.
    ``lower`` comes from feasible box centres and a ``budget``-start local
    search; ``upper`` is a certified bound.
    """
    forms = np.asarray(forms, dtype=np.complex128)
    q = forms.shape[0]
    u, s, _ = np.linalg.svd(forms, full_matrices=False)
    m = numeric_rank(forms, tol)
    if m == 0:
        return BoundResult(0.0, 0.0, np.zeros(q), 0, True)
    basis = u[:, :m]
    row = np.linalg.norm(basis, axis=1)
    radius = np.sqrt(q)
    dim = 2 * m - 1
    rng = make_rng(seed)

    # local search for a good feasible point
    def neg_ratio(z):
        w = basis @ _to_complex(z, m)
        return -float(_ratio(w))

    best_lower, best_w = 0.0, basis[:, 0].copy()
    for _ in range(max(1, budget)):
        z0 = rng.uniform(-1, 1, dim)
        res = minimize(neg_ratio, z0, method="Nelder-Mead",
                       options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 200 * dim})
        if -res.fun > best_lower:
            best_lower = -res.fun
            best_w = basis @ _to_complex(res.x, m)
    if best_lower >= 1 - tol.eq_tol:
        return BoundResult(1.0, best_lower, best_w / np.abs(best_w).max(), 0, True)

    lo = np.full(dim, -radius)
    hi = np.full(dim, radius)
    lo[0] = 0.0
    centers = ((lo + hi) / 2)[None, :]
    halves = ((hi - lo) / 2)[None, :]

    def evaluate(c, h):
        w = _to_complex(c, m) @ basis.T
        rad = np.linalg.norm(h, axis=1)
        mags = np.abs(w)
        slack = row[None, :] * rad[:, None]
        infeasible = np.any(mags - slack > 1, axis=1) | (np.linalg.norm(c, axis=1) - rad > radius)
        ub = np.minimum(1.0, np.min(mags + slack, axis=1))
        ub[infeasible] = -np.inf
        return ub, _ratio(w), w

    ub, ratio, w = evaluate(centers, halves)
    examined = 1
    max_boxes = 5000 * max(1, budget)
    converged = False
    while True:
        keep = ub > best_lower
        centers, halves, ub = centers[keep], halves[keep], ub[keep]
        upper = max(best_lower, ub.max()) if ub.size else best_lower
        if best_lower >= 1 - tol.eq_tol or upper - best_lower <= gap:
            converged = True
            break
        if examined >= max_boxes:
            break
        order = np.argsort(-ub)[:batch]
        rest = np.setdiff1d(np.arange(ub.size), order)
        pc, ph = centers[order], halves[order]
        axis = np.argmax(ph, axis=1)
        step = np.zeros_like(ph)
        step[np.arange(len(axis)), axis] = ph[np.arange(len(axis)), axis] / 2
        child_h = ph.copy()
        child_h[np.arange(len(axis)), axis] /= 2
        new_c = np.concatenate([pc - step, pc + step])
        new_h = np.concatenate([child_h, child_h])
        new_ub, new_ratio, new_w = evaluate(new_c, new_h)
        examined += len(new_c)
        i = int(np.argmax(new_ratio))
        if new_ratio[i] > best_lower:
            best_lower = float(new_ratio[i])
            best_w = new_w[i] / np.abs(new_w[i]).max()
        centers = np.concatenate([centers[rest], new_c])
        halves = np.concatenate([halves[rest], new_h])
        ub = np.concatenate([ub[rest], new_ub])
    upper = max(best_lower, ub.max()) if ub.size else best_lower
    return BoundResult(float(upper), float(best_lower), best_w, examined, converged)


def _unitarity_defect(z, mats, n):
    c = z[::2] + 1j * z[1::2]
    m = np.tensordot(c, mats, axes=1)
    s = np.vdot(m, m).real / n
    if s < 1e-300:
        return 1e6
    g = m.conj().T @ m - s * np.eye(n)
    return float(np.vdot(g, g).real / s**2)


def span_unitarity_search(mats, budget: int = 8, seed=0) -> dict:
    """Look for a multiple of a unitary in ``span(mats)``.

    Minimises ``|M*M - s I|_F^2 / s^2`` with ``s = |M|_F^2 / n`` over
    ``M = sum_i c_i mats[i]``, starting from every generator and from
    ``budget`` random coefficient vectors.  Returns the best singular-value
    ratio ``sigma_min / sigma_max`` (1 for a unitary multiple), the
    coefficients achieving it and the per-start transcript.
    """
    mats = np.asarray(mats, dtype=np.complex128)
    r, n, _ = mats.shape
    rng = make_rng(seed)
    starts = [np.eye(r)[i].astype(np.complex128) for i in range(r)]
    starts += [complex_gaussian(rng, r) for _ in range(max(1, budget))]
    best_ratio, best_c = -1.0, starts[0]
    transcript = []
    for c0 in starts:
        z0 = np.empty(2 * r)
        z0[::2], z0[1::2] = c0.real, c0.imag
        res = minimize(_unitarity_defect, z0, args=(mats, n), method="BFGS",
                       options={"gtol": 1e-12, "maxiter": 500})
        c = res.x[::2] + 1j * res.x[1::2]
        sv = np.linalg.svd(np.tensordot(c, mats, axes=1), compute_uv=False)
        ratio = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
        transcript.append({"ratio": ratio, "defect": float(res.fun)})
        if ratio > best_ratio:
            best_ratio, best_c = ratio, c
        if best_ratio >= 1 - 1e-6:
            break
    return {"ratio": best_ratio, "coefficients": best_c, "transcript": transcript}


def span_is_jointly_diagonal(mats, tol: Tolerances = DEFAULT_TOL) -> bool:
    if not is_commuting_normal(mats, tol):
        return False
    try:
        diagonal_forms(mats, tol)
    except NotCommutingFamilyError:
        return False
    return True
