"""Dense complex linear algebra kernel.

Everything downstream (Kraus maps, generators, masa decision procedures)
funnels its numerics through this module: Hermitian eigendecomposition with a
deterministic phase convention, minimum-norm least squares over real and
complex unknowns, the matrix exponential, commutant computation, and a single
tolerance policy shared by every rank and feasibility threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    NotSelfAdjoint,
    NumericalFailure,
    PreconditionFailed,
    ToleranceInvalid,
)

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "Verdict",
    "dag",
    "vec",
    "unvec",
    "offdiag",
    "frobenius",
    "require_matrix",
    "hermitian_eig",
    "real_linear_least_squares",
    "complex_least_squares",
    "realify_conjugate_linear_system",
    "complex_from_realified",
    "matrix_exp",
    "expm_skew",
    "matrix_rank_tol",
    "nullspace",
    "commutant_intersection",
    "haar_unitary",
]


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative tolerance pair used by every numeric verdict.

    A matrix equality test ``A ≈ B`` means
    ``‖A − B‖_F ≤ atol + rtol · max(‖A‖_F, ‖B‖_F)``; singular values below
    ``atol + rtol · s_max`` count as zero in every rank decision.
    """

    atol: float = 1e-9
    rtol: float = 1e-9

    def __post_init__(self):
        for name in ("atol", "rtol"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ToleranceInvalid(f"{name} must be finite and nonnegative, got {v}")
        if self.atol == 0 and self.rtol == 0:
            raise ToleranceInvalid("at least one of atol, rtol must be positive")

    def threshold(self, scale: float = 1.0) -> float:
        """Feasibility cutoff for a residual measured against `scale`."""
        return self.atol + self.rtol * float(scale)

    def close(self, a: np.ndarray, b: np.ndarray) -> bool:
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        scale = max(frobenius(a), frobenius(b))
        return frobenius(a - b) <= self.threshold(scale)

    def rank_cut(self, s_max: float) -> float:
        return self.atol + self.rtol * float(s_max)


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class Verdict:
    """Boolean decision together with the residual and cutoff that produced it."""

    ok: bool
    residual: float
    threshold: float

    def __bool__(self) -> bool:
        return self.ok


def dag(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def vec(x: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization: columns concatenated top to bottom."""
    return np.asarray(x).ravel(order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of `vec` for a d×d matrix."""
    return np.asarray(v).reshape((d, d), order="F")


def offdiag(a: np.ndarray) -> np.ndarray:
    """The matrix with its diagonal zeroed."""
    return a - np.diag(np.diag(a))


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def require_matrix(a, dim: int | None = None, name: str = "matrix") -> np.ndarray:
    """Coerce to a square complex array, checking shape and finiteness."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise DimensionMismatch(f"{name} must be {dim}x{dim}, got {m.shape[0]}x{m.shape[1]}")
    if not np.all(np.isfinite(m)):
        raise NumericalFailure(f"{name} contains non-finite entries")
    return m


def _phase_normalize_columns(v: np.ndarray) -> np.ndarray:
    """Scale each column so its largest-magnitude entry is real positive.

    Ties are broken by the lowest row index (np.argmax picks the first
    maximum), which makes eigenbases and nullspace bases reproducible.
    """
    out = np.array(v, dtype=complex, copy=True)
    for j in range(out.shape[1]):
        col = out[:, j]
        idx = int(np.argmax(np.abs(col)))
        pivot = col[idx]
        if abs(pivot) > 0:
            out[:, j] = col * (abs(pivot) / pivot)
    return out


def hermitian_eig(a, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a self-adjoint matrix.

    Parameters
    ----------
    a : array_like
        Square matrix with ``‖a − a*‖_F`` within tolerance of zero.
    tol : Tolerance

    Returns
    -------
    (eigenvalues, eigenvectors)
        Real eigenvalues ascending; unitary eigenvector matrix with the
        deterministic column phase convention applied.
    """
    m = require_matrix(a)
    sym_defect = frobenius(m - dag(m))
    if sym_defect > tol.threshold(frobenius(m)):
        raise NotSelfAdjoint(f"symmetry defect {sym_defect:.3e} exceeds tolerance")
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v.view(float)))):
        raise NumericalFailure("eigendecomposition produced non-finite output")
    return w, _phase_normalize_columns(v)


def real_linear_least_squares(a, b) -> tuple[np.ndarray, float]:
    """Minimum-norm least-squares solution of a real system.

    Returns the minimizer x of ``‖a x − b‖₂`` of smallest Euclidean norm,
    together with the achieved residual.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"incompatible system shapes {a.shape} and {b.shape}")
    if a.shape[1] == 0:
        return np.zeros(0), float(np.linalg.norm(b))
    x, _, _, _ = np.linalg.lstsq(a, b, rcond=None)
    # residues from lstsq are unreliable for rank-deficient systems
    return x, float(np.linalg.norm(a @ x - b))


def complex_least_squares(a, b) -> tuple[np.ndarray, float]:
    """Minimum-norm least squares over complex unknowns."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"incompatible system shapes {a.shape} and {b.shape}")
    if a.shape[1] == 0:
        return np.zeros(0, dtype=complex), float(np.linalg.norm(b))
    x, _, _, _ = np.linalg.lstsq(a, b, rcond=None)
    return x, float(np.linalg.norm(a @ x - b))


def realify_conjugate_linear_system(p, q, rhs) -> tuple[np.ndarray, np.ndarray]:
    """Realify equations ``Σ_i (z_i p_ki + conj(z_i) q_ki) = rhs_k``.

    Each complex unknown z_i occupies two adjacent real unknowns
    (Re z_i, Im z_i); each complex equation contributes two real rows.
    Conjugate-linear terms become sign flips in the imaginary columns.
    """
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    if p.shape != q.shape or p.ndim != 2 or rhs.shape != (p.shape[0],):
        raise DimensionMismatch(f"incompatible system shapes {p.shape}, {q.shape}, {rhs.shape}")
    m, n = p.shape
    a_real = np.zeros((2 * m, 2 * n))
    b_real = np.zeros(2 * m)
    # z = x + iy: coefficient of x is p + q, coefficient of y is i(p - q)
    cx = p + q
    cy = 1j * (p - q)
    a_real[0::2, 0::2] = cx.real
    a_real[0::2, 1::2] = cy.real
    a_real[1::2, 0::2] = cx.imag
    a_real[1::2, 1::2] = cy.imag
    b_real[0::2] = rhs.real
    b_real[1::2] = rhs.imag
    return a_real, b_real


def complex_from_realified(x: np.ndarray) -> np.ndarray:
    """Reassemble complex unknowns from the interleaved real solution."""
    x = np.asarray(x, dtype=float)
    return x[0::2] + 1j * x[1::2]


def matrix_exp(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Matrix exponential e^a (scaling-and-squaring Pade)."""
    m = require_matrix(a)
    out = scipy.linalg.expm(m)
    if not np.all(np.isfinite(out.view(float))):
        raise NumericalFailure("matrix exponential overflowed")
    return out


def expm_skew(a: np.ndarray) -> np.ndarray:
    """Exponential of a skew-Hermitian matrix via eigendecomposition.

    Exact for the unitary-group retractions used by the masa search, and
    cheaper than the general-purpose exponential at small dimensions.
    """
    w, v = np.linalg.eigh(1j * np.asarray(a, dtype=complex))
    return (v * np.exp(-1j * w)) @ dag(v)


def matrix_rank_tol(a, tol: Tolerance = DEFAULT_TOL) -> int:
    """Rank with singular values below ``atol + rtol·s_max`` counted as zero."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > tol.rank_cut(s[0])))


def nullspace(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the nullspace, per the rank threshold."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    _, s, vh = np.linalg.svd(a)
    if s.size == 0:
        rank = 0
    else:
        rank = int(np.sum(s > tol.rank_cut(s[0])))
    return _phase_normalize_columns(dag(vh)[:, rank:])


def commutant_intersection(
    a_list: Sequence, tol: Tolerance = DEFAULT_TOL
) -> tuple[int, list[np.ndarray]]:
    """Joint commutant {X : [X, A] = [X, A*] = 0 for all A} of a family.

    Returns its dimension (rank-based, per the shared threshold) and an
    orthonormal basis of matrices. The identity always lies in the result,
    so the dimension is at least 1.
    """
    if len(a_list) == 0:
        raise PreconditionFailed("commutant of an empty family is ambiguous; pass the identity")
    mats = [require_matrix(a, name=f"a_list[{k}]") for k, a in enumerate(a_list)]
    d = mats[0].shape[0]
    for k, m in enumerate(mats):
        if m.shape[0] != d:
            raise DimensionMismatch(f"a_list[{k}] has dimension {m.shape[0]}, expected {d}")
    eye = np.eye(d)
    blocks = []
    for m in mats:
        for g in (m, dag(m)):
            # vec(XG - GX) = (G^T ⊗ 1 - 1 ⊗ G) vec(X)
            blocks.append(np.kron(g.T, eye) - np.kron(eye, g))
    stacked = np.vstack(blocks)
    basis_vecs = nullspace(stacked, tol)
    basis = [unvec(basis_vecs[:, j], d) for j in range(basis_vecs.shape[1])]
    return len(basis), basis


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-distributed d×d unitary (QR of a complex Ginibre matrix)."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    ph = np.diag(r).copy()
    ph /= np.abs(ph)
    return q * ph
