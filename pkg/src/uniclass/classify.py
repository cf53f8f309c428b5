"""Membership tests for classes of bipartite unitaries.

Every test returns a :class:`~uniclass.verdicts.Verdict`.  Yes and No
verdicts carry a witness from which the answer can be re-checked; Unknown
means the available necessary or sufficient conditions were inconclusive.
:func:`classify_all` runs the whole battery and cross-checks the results
against the known inclusions between classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blocksvd import (
    NotBlockDiagonalError,
    PairingAmbiguityError,
    canonicalize,
    compute_block_svd,
    has_block_svd,
)
from .channels import (
    NotUnitaryError,
    choi_of,
    kraus_from_env_vector,
    state_spanning_set,
)
from .generate import haar_vector, make_rng, random_density
from .matcore import (
    DEFAULT_TOL,
    BipartiteOperator,
    DimensionError,
    Tolerances,
    flip,
    is_hermitian,
    is_unitary,
    max_norm,
    operator_schmidt,
    partial_transpose_B,
    swap_factors,
)
from .mixed import (
    diagonal_forms,
    is_commuting_normal,
    span_unitarity_search,
    unimodular_bound,
)
from .blocksvd import NotCommutingFamilyError
from .verdicts import NO, UNKNOWN, YES, Verdict

__all__ = [
    "CLASS_NAMES",
    "InternalInconsistency",
    "NotAProjectionError",
    "ClassReport",
    "is_aut",
    "is_const",
    "is_unital_member",
    "is_block_diag_A",
    "is_block_diag_B",
    "decompose_AB",
    "cppt_matrix",
    "is_cppt",
    "cppt_projection_check",
    "mixed_necessary",
    "eb_qubit",
    "consistency_violations",
    "classify_all",
]

CLASS_NAMES = (
    "aut",
    "single",
    "const",
    "unital",
    "block_diag_A",
    "block_diag_B",
    "block_diag_AB",
    "cppt",
    "mixed_necessary",
    "mixed",
    "prob_lin",
    "eb_qubit",
)

HEURISTIC_MARGIN = 1e-3


class InternalInconsistency(RuntimeError):
    """A :class:`ClassReport` contradicts a known inclusion between classes."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class NotAProjectionError(ValueError):
    """Input to :func:`cppt_projection_check` is not an orthogonal projection."""


def _require_unitary(u: BipartiteOperator, tol: Tolerances):
    if not isinstance(u, BipartiteOperator):
        raise TypeError("expected a BipartiteOperator")
    if not is_unitary(u.mat, tol):
        raise NotUnitaryError("operator is not unitary within tolerance")


def _fix_phase(v: np.ndarray) -> complex:
    """Phase of the largest-magnitude entry of ``v`` (first among near-ties)."""
    flat = v.reshape(-1)
    mags = np.abs(flat)
    idx = int(np.nonzero(mags >= mags.max() * (1 - 1e-6))[0][0])
    return flat[idx] / mags[idx]


def is_aut(u: BipartiteOperator, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Product test ``U = V (x) W``.

    Yes iff the operator-Schmidt rank is 1.  The witness holds unitary
    ``V`` and ``W`` normalised so that the largest entry of ``V`` is real
    positive; otherwise it holds the Schmidt rank and weights.
    """
    _require_unitary(u, tol)
    terms = operator_schmidt(u, tol)
    if len(terms) != 1:
        return Verdict(NO, {"schmidt_rank": len(terms), "weights": np.array([t[0] for t in terms])})
    w, a, b = terms[0]
    v = a * np.sqrt(u.n)
    wmat = b * (w / np.sqrt(u.n))
    ph = _fix_phase(v)
    v, wmat = v / ph, wmat * ph
    return Verdict(YES, {"schmidt_rank": 1, "V": v, "W": wmat})


def is_const(u: BipartiteOperator, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Constant-channel test: ``L_{U,beta}`` ignores its input for every ``beta``.

    By linearity it suffices that, for each of ``k^2`` spanning states, the
    Choi matrix equals ``I_n (x) sigma``.  The witness lists the sampled
    outputs ``sigma(beta_m)``, or the first offending state.
    """
    _require_unitary(u, tol)
    n, k = u.n, u.k
    if k % n:
        return Verdict(NO, {"reason": "dimension obstruction", "n": n, "k": k})
    states, outputs = [], []
    for m, beta in enumerate(state_spanning_set(k)):
        c = choi_of(u, beta)
        sigma = c[:n, :n]
        defect = max_norm(c - np.kron(np.eye(n), sigma))
        if defect > tol.eq_tol:
            return Verdict(NO, {"reason": "input dependent output", "state_index": m,
                                "beta": beta, "defect": defect})
        states.append(beta)
        outputs.append(sigma)
    return Verdict(YES, {"states": states, "outputs": outputs})


def is_unital_member(u: BipartiteOperator, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Yes iff ``U^Gamma`` is unitary, i.e. every ``L_{U,beta}`` is unital."""
    _require_unitary(u, tol)
    g = partial_transpose_B(u).mat
    eye = np.eye(u.dim)
    defect = max(max_norm(g @ g.conj().T - eye), max_norm(g.conj().T @ g - eye))
    return Verdict(YES if defect <= tol.eq_tol else NO, {"defect": defect})


def _block_verdict(x: BipartiteOperator, tol: Tolerances, seed, frame: str) -> Verdict:
    check = has_block_svd(x, tol)
    if not check:
        witness = dict(check.witness)
        witness["frame"] = frame
        return Verdict(NO, witness)
    witness = {"frame": frame}
    try:
        d = canonicalize(compute_block_svd(x, tol, seed), tol)
    except (PairingAmbiguityError, NotBlockDiagonalError, RuntimeError) as exc:
        witness["criterion"] = "commuting normal block families"
        witness["decomposition_error"] = str(exc)
        return Verdict(YES, witness)
    witness["terms"] = len(d)
    witness["block_svd"] = d
    return Verdict(YES, witness)


def is_block_diag_A(u: BipartiteOperator, tol: Tolerances = DEFAULT_TOL, seed=0) -> Verdict:
    """``U = sum_i U_i (x) R_i`` with unitary ``U_i`` and orthogonal partial isometries ``R_i``."""
    _require_unitary(u, tol)
    return _block_verdict(u, tol, seed, "A")


def is_block_diag_B(u: BipartiteOperator, tol: Tolerances = DEFAULT_TOL, seed=0) -> Verdict:
    """The ``A`` test applied after swapping the tensor factors.

    A Yes witness is a block SVD of the swapped operator, so its terms read
    ``U = sum_i R_i (x) U_i`` in the original frame.
    """
    _require_unitary(u, tol)
    return _block_verdict(swap_factors(u), tol, seed, "B (swapped factors)")


def _rank_one_bases(isoms, tol):
    left, right = [], []
    for r in isoms:
        x, s, yh = np.linalg.svd(r)
        keep = s > 0.5
        left.append(x[:, keep])
        right.append(yh[keep].conj().T)
    return np.hstack(left), np.hstack(right)


def decompose_AB(u: BipartiteOperator, tol: Tolerances = DEFAULT_TOL, seed=0) -> Verdict:
    """Decompose a member of both block classes as ``sum lam_ij e_i f_i* (x) g_j h_j*``.

    The bases come from singular value decompositions of the partial
    isometries in the two block SVDs; ``lam`` is read off and the
    reconstruction is verified.
    """
    a = is_block_diag_A(u, tol, seed)
    b = is_block_diag_B(u, tol, seed)
    if not (a.yes and b.yes):
        return Verdict(NO, {"block_diag_A": a.value, "block_diag_B": b.value,
                            "failing_side": "A" if not a.yes else "B",
                            "commutator": (a if not a.yes else b).witness})
    if "block_svd" not in a.witness or "block_svd" not in b.witness:
        return Verdict(UNKNOWN, {"reason": "block SVD could not be constructed"})
    g, h = _rank_one_bases([t.isom for t in a.witness["block_svd"].terms], tol)
    e, f = _rank_one_bases([t.isom for t in b.witness["block_svd"].terms], tol)
    if e.shape != (u.n, u.n) or g.shape != (u.k, u.k):
        return Verdict(UNKNOWN, {"reason": "partial isometries do not tile the factors"})
    t = u.tensor4()
    lam = np.einsum("ai,bj,abcd,ci,dj->ij", e.conj(), g.conj(), t, f, h, optimize=True)
    recon = np.einsum("ij,ai,ci,bj,dj->abcd", lam, e, f.conj(), g, h.conj(), optimize=True)
    err = max_norm(recon.reshape(u.dim, u.dim) - u.mat)
    unimod = float(np.max(np.abs(np.abs(lam) - 1)))
    if err > 10 * tol.eq_tol or unimod > 10 * tol.eq_tol:
        return Verdict(UNKNOWN, {"reason": "reconstruction failed", "error": err})
    return Verdict(YES, {"lam": lam, "e": e, "f": f, "g": g, "h": h, "error": err})


def cppt_matrix(u: BipartiteOperator) -> np.ndarray:
    """``(I_n (x) U^Gamma)(F_n (x) I_k)(I_n (x) U^Gamma)*`` of size ``n^2 k``."""
    g = partial_transpose_B(u).mat
    left = np.kron(np.eye(u.n), g)
    return left @ np.kron(flip(u.n), np.eye(u.k)) @ left.conj().T


def _psd_verdict(m, tol):
    m = (m + m.conj().T) / 2
    lo = float(np.linalg.eigvalsh(m)[0])
    return Verdict(YES if lo >= -tol.eq_tol else NO, {"min_eigenvalue": lo})


def is_cppt(u: BipartiteOperator, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Yes iff every ``L_{U,beta}`` has a completely positive partial transpose."""
    _require_unitary(u, tol)
    return _psd_verdict(cppt_matrix(u), tol)


def cppt_projection_check(p, n: int, k: int, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """PSD test of ``(I_n (x) P)(F_n (x) I_k)(I_n (x) P)`` for a projection ``P``."""
    p = np.asarray(p, dtype=np.complex128)
    if p.shape != (n * k, n * k):
        raise DimensionError(f"projection must be {n * k} x {n * k}")
    if not is_hermitian(p, tol) or max_norm(p @ p - p) > tol.eq_tol:
        raise NotAProjectionError("matrix is not an orthogonal projection")
    left = np.kron(np.eye(n), p)
    return _psd_verdict(left @ np.kron(flip(n), np.eye(k)) @ left, tol)


def _env_vectors(k, f, budget, seed):
    if f is not None:
        return [np.asarray(f, dtype=np.complex128).ravel()]
    rng = make_rng(seed)
    return [np.eye(k, dtype=np.complex128)[i] for i in range(k)] + [
        haar_vector(k, rng) for _ in range(budget)
    ]


def mixed_necessary(
    u: BipartiteOperator,
    f=None,
    tol: Tolerances = DEFAULT_TOL,
    budget: int = 8,
    seed=0,
) -> Verdict:
    """Necessary condition for every ``L_{U,beta}`` to be mixed unitary.

    For each environment vector ``f`` the span of the Kraus operators
    ``(I (x) e_i*) U (I (x) f)`` must contain a unitary.  A No is returned as
    soon as one ``f`` is shown to violate this.

    Parameters
    ----------
    f : array_like, optional
        Unit vector in ``C^k``.  By default the canonical basis and
        ``budget`` Haar vectors are tried.
    budget : int
        Restarts for local searches; also scales the branch-and-bound limit.

    Notes
    -----
    When the Kraus operators form a commuting normal family the question
    reduces to unimodularity of linear forms, and a No is certified by a
    branch-and-bound upper bound below ``1 - 10 eq_tol``.  Otherwise a
    multi-start search for a unitary in the span gives a heuristic No when
    the best ``sigma_min / sigma_max`` stays below ``1 - 1e-3``.
    """
    _require_unitary(u, tol)
    if f is not None:
        fv = np.asarray(f, dtype=np.complex128).ravel()
        if fv.size != u.k or abs(np.linalg.norm(fv) - 1) > tol.eq_tol:
            raise ValueError("f must be a unit vector in C^k")
    threshold = 1 - 10 * tol.eq_tol
    summary, heuristic = [], None
    for idx, fv in enumerate(_env_vectors(u.k, f, budget, seed)):
        mats = kraus_from_env_vector(u, fv, tol=tol)
        diagonal = is_commuting_normal(mats, tol)
        if diagonal:
            try:
                forms, _ = diagonal_forms(mats, tol, seed)
            except NotCommutingFamilyError:
                diagonal = False
        if diagonal:
            bound = unimodular_bound(forms, tol, budget, seed)
            summary.append({"f_index": idx, "path": "diagonal", **bound.to_dict()})
            if bound.upper < threshold:
                return Verdict(NO, {"path": "diagonal", "f": fv, "forms": forms,
                                    "bound": bound.to_dict(), "threshold": threshold})
            continue
        search = span_unitarity_search(mats, budget, seed)
        summary.append({"f_index": idx, "path": "search", "ratio": search["ratio"]})
        if search["ratio"] < 1 - HEURISTIC_MARGIN and heuristic is None:
            heuristic = {"path": "search", "f": fv, "best_ratio": search["ratio"],
                         "margin": HEURISTIC_MARGIN, "transcript": search["transcript"]}
    if heuristic is not None:
        return Verdict(NO, heuristic, heuristic=True)
    return Verdict(UNKNOWN, {"sweep": summary})


def eb_qubit(
    u: BipartiteOperator, tol: Tolerances = DEFAULT_TOL, budget: int = 8, seed=0
) -> Verdict:
    """Entanglement breaking for all ``beta``, decided only for ``n = 2``.

    Yes when ``U`` is CPPT (every Choi matrix is then PPT, which is
    separability for two qubits).  No when some environment state gives a
    Choi matrix with non-PPT partial transpose.  Unknown otherwise.
    """
    _require_unitary(u, tol)
    if u.n != 2:
        return Verdict(UNKNOWN, {"reason": "PPT criterion decides separability only for n = 2"})
    cp = is_cppt(u, tol)
    if cp.yes:
        return Verdict(YES, {"cppt_min_eigenvalue": cp.witness["min_eigenvalue"]})
    candidates = [np.eye(u.k) / u.k] + state_spanning_set(u.k)
    rng = make_rng(seed)
    candidates += [random_density(u.k, seed=rng) for _ in range(budget)]
    for beta in candidates:
        c = choi_of(u, beta)
        pt = partial_transpose_B(BipartiteOperator(c, u.n, u.n)).mat
        lo = float(np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0])
        if lo < -tol.eq_tol:
            return Verdict(NO, {"beta": beta, "choi_pt_min_eigenvalue": lo})
    return Verdict(UNKNOWN, {"states_tried": len(candidates)})


@dataclass
class ClassReport:
    """Verdicts for one operator, keyed by class name."""

    n: int
    k: int
    verdicts: dict[str, Verdict] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Verdict:
        return self.verdicts[name]

    def value(self, name: str):
        v = self.verdicts.get(name)
        return None if v is None else v.value

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k,
                "verdicts": {name: v.to_dict() for name, v in self.verdicts.items()}}

    def violations(self) -> list[str]:
        return consistency_violations(self)


def consistency_violations(report: ClassReport) -> list[str]:
    """Names of inclusion rules that the report breaks.

    Rules whose verdicts are missing from the report are skipped.
    """
    v = report.value
    n, k = report.n, report.k
    out = []

    def rule(name, *needed, ok):
        if all(v(x) is not None for x in needed) and not ok():
            out.append(name)

    rule("aut=>single", "aut", "single", ok=lambda: v("aut") != YES or v("single") == YES)
    rule("aut=>block_diag_A", "aut", "block_diag_A",
         ok=lambda: v("aut") != YES or v("block_diag_A") == YES)
    rule("aut=>block_diag_B", "aut", "block_diag_B",
         ok=lambda: v("aut") != YES or v("block_diag_B") == YES)
    rule("block_diag_A=>unital", "block_diag_A", "unital",
         ok=lambda: v("block_diag_A") != YES or v("unital") == YES)
    rule("block_diag_A=>prob_lin", "block_diag_A", "prob_lin",
         ok=lambda: v("block_diag_A") != YES or v("prob_lin") == YES)
    rule("block_diag_B=>unital", "block_diag_B", "unital",
         ok=lambda: v("block_diag_B") != YES or v("unital") == YES)
    rule("block_diag_AB<=>A&B", "block_diag_AB", "block_diag_A", "block_diag_B",
         ok=lambda: (v("block_diag_AB") == YES)
         == (v("block_diag_A") == YES and v("block_diag_B") == YES)
         or v("block_diag_AB") == UNKNOWN)
    rule("mixed=>unital", "mixed", "unital", ok=lambda: v("mixed") != YES or v("unital") == YES)
    rule("block_diag_A=>mixed", "block_diag_A", "mixed",
         ok=lambda: v("block_diag_A") != YES or v("mixed") == YES)
    rule("not mixed_necessary=>not block_diag_A", "mixed_necessary", "block_diag_A",
         ok=lambda: v("mixed_necessary") != NO or v("block_diag_A") == NO)
    if n >= 2:
        # a unitary U^Gamma makes the CPPT matrix similar to F_n (x) I, which has eigenvalue -1
        rule("cppt=>not unital", "cppt", "unital",
             ok=lambda: v("cppt") != YES or v("unital") == NO)
        rule("const=>not unital", "const", "unital",
             ok=lambda: v("const") != YES or v("unital") == NO)
        rule("aut=>not const", "aut", "const", ok=lambda: v("aut") != YES or v("const") == NO)
        rule("eb_qubit=>not unital", "eb_qubit", "unital",
             ok=lambda: v("eb_qubit") != YES or v("unital") == NO)
    if n == 2:
        rule("n=2: block_diag_A<=>unital", "block_diag_A", "unital",
             ok=lambda: v("block_diag_A") == v("unital"))
        rule("n=2: block_diag_B=>block_diag_A", "block_diag_B", "block_diag_A",
             ok=lambda: v("block_diag_B") != YES or v("block_diag_A") == YES)
        rule("n=2: mixed<=>unital", "mixed", "unital", ok=lambda: v("mixed") == v("unital"))
    if k == 2:
        rule("k=2: block_diag_B<=>unital", "block_diag_B", "unital",
             ok=lambda: v("block_diag_B") == v("unital"))
    return out


def classify_all(
    u: BipartiteOperator,
    tol: Tolerances = DEFAULT_TOL,
    budget: int = 8,
    seed=0,
    checks=None,
    strict: bool = True,
) -> ClassReport:
    """Run every membership test and cross-check the results.

    Parameters
    ----------
    checks : iterable of str, optional
        Restrict the report to these class names (plus whatever they
        depend on).  All classes by default.
    strict : bool
        Raise :class:`InternalInconsistency` when an inclusion rule fails.
    """
    _require_unitary(u, tol)
    wanted = set(CLASS_NAMES if checks is None else checks)
    unknown = wanted - set(CLASS_NAMES)
    if unknown:
        raise ValueError(f"unknown class names: {sorted(unknown)}")
    if wanted & {"mixed", "mixed_necessary"}:
        wanted |= {"unital", "block_diag_A", "mixed_necessary"}
    if wanted & {"block_diag_AB"}:
        wanted |= {"block_diag_A", "block_diag_B"}
    if "prob_lin" in wanted:
        wanted.add("block_diag_A")
    if "single" in wanted:
        wanted.add("aut")

    out: dict[str, Verdict] = {}
    if "aut" in wanted:
        out["aut"] = is_aut(u, tol)
        if "single" in wanted:
            out["single"] = out["aut"]
    if "unital" in wanted:
        out["unital"] = is_unital_member(u, tol)
    if "block_diag_A" in wanted:
        out["block_diag_A"] = is_block_diag_A(u, tol, seed)
    if "block_diag_B" in wanted:
        out["block_diag_B"] = is_block_diag_B(u, tol, seed)
    if "block_diag_AB" in wanted:
        if out["block_diag_A"].yes and out["block_diag_B"].yes:
            out["block_diag_AB"] = decompose_AB(u, tol, seed)
        else:
            side = "A" if not out["block_diag_A"].yes else "B"
            out["block_diag_AB"] = Verdict(NO, {"implied_by": f"block_diag_{side}",
                                                "witness": out[f"block_diag_{side}"].witness})
    if "prob_lin" in wanted:
        out["prob_lin"] = out["block_diag_A"]
    if "const" in wanted:
        out["const"] = is_const(u, tol)
    if "cppt" in wanted:
        out["cppt"] = is_cppt(u, tol)
    if "mixed_necessary" in wanted:
        if out["unital"].no:
            out["mixed_necessary"] = Verdict(NO, {"implied_by": "unital",
                                                  "defect": out["unital"].witness["defect"]})
        elif out["block_diag_A"].yes:
            out["mixed_necessary"] = Verdict(UNKNOWN, {"implied_by": "block_diag_A",
                                                       "reason": "member of a mixed-unitary class"})
        else:
            out["mixed_necessary"] = mixed_necessary(u, None, tol, budget, seed)
    if "mixed" in wanted:
        if out["block_diag_A"].yes:
            out["mixed"] = Verdict(YES, {"implied_by": "block_diag_A"})
        elif u.n == 2:
            out["mixed"] = Verdict(out["unital"].value, {"implied_by": "unital (n = 2)"})
        elif out["mixed_necessary"].no:
            nec = out["mixed_necessary"]
            out["mixed"] = Verdict(NO, {"implied_by": "mixed_necessary"}, heuristic=nec.heuristic)
        else:
            out["mixed"] = Verdict(UNKNOWN, {"reason": "necessary condition inconclusive"})
    if "eb_qubit" in wanted:
        out["eb_qubit"] = eb_qubit(u, tol, budget, seed)

    report = ClassReport(u.n, u.k, {name: out[name] for name in CLASS_NAMES if name in out})
    bad = consistency_violations(report)
    if bad and strict:
        raise InternalInconsistency(f"inconsistent classification: {bad}", bad)
    return report
