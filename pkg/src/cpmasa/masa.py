"""Maximal abelian subalgebras of M_d and their invariance analysis.

A masa is represented by a unitary whose columns are a joint eigenbasis, so
the algebra is U 𝓓_d U*. The module decides invariance under CP maps,
generators, and raw superoperators, solves the two coefficient criteria that
characterize invariance in terms of the Kraus family, runs the
per-decomposition sufficiency analysis, constructs an invariant masa on M₂,
searches for one numerically in higher dimension, and restricts an invariant
evolution to its classical Markov kernel on the masa.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .cpmaps import KrausMap, apply_cp
from .cpmaps import superoperator as map_superoperator
from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    NotInvariant,
    NumericalFailure,
    PatternExplosion,
    PreconditionFailed,
)
from .gksl import GkslGenerator, apply_generator
from .gksl import superoperator as generator_superoperator
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    Verdict,
    _phase_normalize_columns,
    complex_least_squares,
    dag,
    expm_skew,
    frobenius,
    haar_unitary,
    hermitian_eig,
    matrix_rank_tol,
    nullspace,
    offdiag,
    real_linear_least_squares,
    require_matrix,
    unvec,
    vec,
)

__all__ = [
    "Masa",
    "Infeasible",
    "KrausCoefficientWitness",
    "GeneratorCoefficientWitness",
    "PatternIntersection",
    "RebolledoVerdict",
    "masa_from_selfadjoint",
    "is_invariant_map",
    "is_invariant_generator",
    "is_invariant_superoperator",
    "solve_kraus_coefficients",
    "solve_generator_coefficients",
    "rebolledo_check",
    "find_masa_m2",
    "search_masa",
    "search_invariant_projections",
    "classical_restriction",
]


@dataclass(frozen=True)
class Masa:
    """Masa U 𝓓_d U* given by the unitary of its joint eigenbasis."""

    dim: int
    basis_unitary: np.ndarray

    def __init__(self, basis_unitary, tol: Tolerance = DEFAULT_TOL):
        u = require_matrix(basis_unitary, name="basis_unitary")
        d = u.shape[0]
        defect = frobenius(dag(u) @ u - np.eye(d))
        if defect > tol.threshold(np.sqrt(d)):
            raise PreconditionFailed(f"basis unitarity defect {defect:.3e} exceeds tolerance")
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "basis_unitary", u)

    @classmethod
    def diagonal(cls, dim: int) -> "Masa":
        """The diagonal masa 𝓓_d."""
        return cls(np.eye(dim, dtype=complex))

    def to_coordinates(self, x) -> np.ndarray:
        """Conjugate into the eigenbasis, where the masa is diagonal."""
        u = self.basis_unitary
        return dag(u) @ np.asarray(x, dtype=complex) @ u

    def from_coordinates(self, x) -> np.ndarray:
        u = self.basis_unitary
        return u @ np.asarray(x, dtype=complex) @ dag(u)

    def projection(self, k: int) -> np.ndarray:
        """The k-th minimal projection u_k u_k*."""
        col = self.basis_unitary[:, k]
        return np.outer(col, col.conj())


def masa_from_selfadjoint(c, tol: Tolerance = DEFAULT_TOL) -> Masa:
    """The masa generated by a self-adjoint element with simple spectrum."""
    cm = require_matrix(c, name="c")
    w, v = hermitian_eig(cm, tol)
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    if len(w) > 1:
        smallest_gap = float(np.diff(w).min())
        if smallest_gap <= tol.threshold(scale):
            raise DegenerateSpectrum(
                f"smallest eigenvalue gap {smallest_gap:.3e} is below tolerance"
            )
    return Masa(v, tol)


@dataclass(frozen=True)
class Infeasible:
    """Negative answer of a coefficient criterion, with its residual."""

    residual: float
    threshold: float

    def __bool__(self) -> bool:
        return False


def _as_superoperator(source) -> tuple[int, np.ndarray]:
    if isinstance(source, KrausMap):
        return source.dim, map_superoperator(source)
    if isinstance(source, GkslGenerator):
        return source.dim, generator_superoperator(source)
    s = require_matrix(source, name="superoperator")
    d = int(round(np.sqrt(s.shape[0])))
    if d * d != s.shape[0]:
        raise DimensionMismatch(f"superoperator side {s.shape[0]} is not a square")
    return d, s


def _rotated_projection_images(apply_fn, masa: Masa) -> list[np.ndarray]:
    """Images of the minimal projections, in masa coordinates."""
    return [masa.to_coordinates(apply_fn(masa.projection(k))) for k in range(masa.dim)]


def _invariance_verdict(images, tol: Tolerance) -> Verdict:
    residual = max(frobenius(offdiag(img)) for img in images)
    scale = max(1.0, max(frobenius(img) for img in images))
    threshold = tol.threshold(scale)
    return Verdict(ok=residual <= threshold, residual=residual, threshold=threshold)


def is_invariant_map(t: KrausMap, masa: Masa, tol: Tolerance = DEFAULT_TOL) -> Verdict:
    """Whether T(C) ⊆ C, by the off-diagonal residual on basis projections."""
    if t.dim != masa.dim:
        raise DimensionMismatch(f"map dim {t.dim} vs masa dim {masa.dim}")
    images = _rotated_projection_images(lambda x: apply_cp(t, x), masa)
    return _invariance_verdict(images, tol)


def is_invariant_generator(
    gen: GkslGenerator, masa: Masa, tol: Tolerance = DEFAULT_TOL
) -> Verdict:
    """Whether L(C) ⊆ C; by linearity this decides invariance of e^{tL}."""
    if gen.dim != masa.dim:
        raise DimensionMismatch(f"generator dim {gen.dim} vs masa dim {masa.dim}")
    images = _rotated_projection_images(lambda x: apply_generator(gen, x), masa)
    return _invariance_verdict(images, tol)


def is_invariant_superoperator(s, masa: Masa, tol: Tolerance = DEFAULT_TOL) -> Verdict:
    """Invariance for an evolution given only as a d²×d² superoperator."""
    d, sm = _as_superoperator(s)
    if d != masa.dim:
        raise DimensionMismatch(f"superoperator dim {d} vs masa dim {masa.dim}")
    images = _rotated_projection_images(lambda x: unvec(sm @ vec(x), d), masa)
    return _invariance_verdict(images, tol)


@dataclass(frozen=True)
class KrausCoefficientWitness:
    """Diagonal coefficients c_ij(E_kk) certifying invariance of a CP map.

    `c_blocks[k, i, j]` holds the length-d diagonal of the coefficient that
    multiplies operator j from the left in the expansion of [E_kk, L_i];
    the family satisfies c_blocks[k, j, i] = conj(c_blocks[k, i, j]).
    Coefficients for a general masa element extend linearly over k.
    """

    c_blocks: np.ndarray
    residual: float


def _pair_positions(n: int):
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    return pairs, {p: idx for idx, p in enumerate(pairs)}


def _kraus_coefficient_solution(ops, tol: Tolerance):
    """Solve the commutator expansion over a Hermitian family of diagonals.

    For each k the unknowns are diagonal vectors w_ij with w_ji = conj(w_ij)
    (so w_ii real), satisfying entrywise
    Σ_j w_ij[r]·L_j[r,s] = (E_kk L_i - L_i E_kk)[r,s]. The symmetry is built
    into the realified unknown layout rather than checked afterwards.
    Returns (c_blocks, total_residual, rhs_norm).
    """
    d = ops[0].shape[0]
    n = len(ops)
    pairs, pair_pos = _pair_positions(n)
    base = n * d
    cols = n * d + len(pairs) * 2 * d
    c_blocks = np.zeros((d, n, n, d), dtype=complex)
    residual_sq = 0.0
    rhs_sq = 0.0
    for k in range(d):
        e_kk = np.zeros((d, d), dtype=complex)
        e_kk[k, k] = 1
        coeff_rows = []
        rhs_vals = []
        for i in range(n):
            comm = e_kk @ ops[i] - ops[i] @ e_kk
            for r in range(d):
                for s in range(d):
                    coeff = np.zeros(cols, dtype=complex)
                    for j in range(n):
                        value = ops[j][r, s]
                        if j == i:
                            coeff[i * d + r] += value
                        elif j > i:
                            p = pair_pos[(i, j)]
                            coeff[base + p * 2 * d + 2 * r] += value
                            coeff[base + p * 2 * d + 2 * r + 1] += 1j * value
                        else:
                            p = pair_pos[(j, i)]
                            coeff[base + p * 2 * d + 2 * r] += value
                            coeff[base + p * 2 * d + 2 * r + 1] += -1j * value
                    coeff_rows.append(coeff)
                    rhs_vals.append(comm[r, s])
        a_cplx = np.asarray(coeff_rows)
        b_cplx = np.asarray(rhs_vals)
        a_real = np.vstack([a_cplx.real, a_cplx.imag])
        b_real = np.concatenate([b_cplx.real, b_cplx.imag])
        x, res = real_linear_least_squares(a_real, b_real)
        residual_sq += res**2
        rhs_sq += float(np.linalg.norm(b_real)) ** 2
        for i in range(n):
            c_blocks[k, i, i, :] = x[i * d : (i + 1) * d]
        for (a, b), p in pair_pos.items():
            block = x[base + p * 2 * d : base + (p + 1) * 2 * d]
            w_ab = block[0::2] + 1j * block[1::2]
            c_blocks[k, a, b, :] = w_ab
            c_blocks[k, b, a, :] = np.conj(w_ab)
    return c_blocks, float(np.sqrt(residual_sq)), float(np.sqrt(rhs_sq))


def solve_kraus_coefficients(t: KrausMap, masa: Masa, tol: Tolerance = DEFAULT_TOL):
    """Coefficient criterion for invariance of a CP map under conjugation.

    Feasibility of the commutator expansion over all basis projections is
    equivalent to T(C) ⊆ C; returns the witness or Infeasible with the
    least-squares residual either way.
    """
    if t.dim != masa.dim:
        raise DimensionMismatch(f"map dim {t.dim} vs masa dim {masa.dim}")
    ops = [masa.to_coordinates(op) for op in t.operators]
    c_blocks, residual, rhs_norm = _kraus_coefficient_solution(ops, tol)
    threshold = tol.threshold(max(1.0, rhs_norm))
    if residual > threshold:
        return Infeasible(residual=residual, threshold=threshold)
    return KrausCoefficientWitness(c_blocks=c_blocks, residual=residual)


@dataclass(frozen=True)
class GeneratorCoefficientWitness:
    """Masa-valued shifts and rate vector certifying generator invariance.

    `c_ops[i]` is the diagonal of the masa element subtracted from operator i,
    `gamma` the real diagonal with L(E_kk) = Σ K_i* E_kk K_i + gamma[k]·E_kk
    for the shifted family K_i, and `inner_witness` the commutator-expansion
    witness of that shifted family.
    """

    c_ops: np.ndarray
    gamma: np.ndarray
    inner_witness: KrausCoefficientWitness
    residual: float


def solve_generator_coefficients(
    gen: GkslGenerator, masa: Masa, tol: Tolerance = DEFAULT_TOL
):
    """Coefficient criterion for invariance of a Lindblad-form generator.

    Stage 1 recovers, for each k, the k-th diagonal entries of the shifts
    from the row-k off-diagonal part of L(E_kk), where they enter linearly.
    Stage 2 reads off gamma[k] from the (k,k) entry and accumulates the
    consistency defects of all remaining entries. Stage 3 runs the CP-map
    coefficient solver on the shifted family. The criterion is feasible iff
    the combined residual stays below tolerance, which happens exactly when
    L(C) ⊆ C.
    """
    if gen.dim != masa.dim:
        raise DimensionMismatch(f"generator dim {gen.dim} vs masa dim {masa.dim}")
    d = gen.dim
    ops = [masa.to_coordinates(op) for op in gen.kraus.operators]
    beta = masa.to_coordinates(gen.beta)
    n = len(ops)
    images = []
    for k in range(d):
        e_kk = np.zeros((d, d), dtype=complex)
        e_kk[k, k] = 1
        img = sum(dag(op) @ e_kk @ op for op in ops) + e_kk @ beta + dag(beta) @ e_kk
        images.append(img)
    scale = max(1.0, float(np.sqrt(sum(frobenius(img) ** 2 for img in images))))

    x = np.zeros((n, d), dtype=complex)
    gamma = np.zeros(d)
    residual_sq = 0.0
    for k in range(d):
        img = images[k]
        other = [s for s in range(d) if s != k]
        # row-k off-diagonal entries: the shifts appear linearly via conj(x_ik)
        m = np.zeros((len(other), n), dtype=complex)
        rhs = np.zeros(len(other), dtype=complex)
        for row, s in enumerate(other):
            for i in range(n):
                m[row, i] = ops[i][k, s]
            rhs[row] = sum(np.conj(op[k, k]) * op[k, s] for op in ops) - img[k, s]
        z, res1 = complex_least_squares(m, rhs)
        x[:, k] = np.conj(z)
        # diagonal entry k defines gamma; everything else must be consistent
        gamma_k = img[k, k] - sum(abs(op[k, k] - x[i, k]) ** 2 for i, op in enumerate(ops))
        gamma[k] = gamma_k.real
        defect_sq = res1**2 + abs(gamma_k.imag) ** 2
        for r in other:
            diag_term = img[r, r] - sum(abs(op[k, r]) ** 2 for op in ops)
            defect_sq += abs(diag_term) ** 2
            for s in other:
                if s == r:
                    continue
                off_term = img[r, s] - sum(
                    np.conj(op[k, r]) * op[k, s] for op in ops
                )
                defect_sq += abs(off_term) ** 2
        residual_sq += defect_sq

    shifted = [op - np.diag(x[i]) for i, op in enumerate(ops)]
    c_blocks, res3, _ = _kraus_coefficient_solution(shifted, tol)
    residual = float(np.sqrt(residual_sq + res3**2))
    threshold = tol.threshold(scale)
    if residual > threshold:
        return Infeasible(residual=residual, threshold=threshold)
    inner = KrausCoefficientWitness(c_blocks=c_blocks, residual=res3)
    return GeneratorCoefficientWitness(
        c_ops=x, gamma=gamma, inner_witness=inner, residual=residual
    )


@dataclass(frozen=True)
class PatternIntersection:
    """Nonzero intersection of the operator span with a support pattern.

    `pattern[r]` is the single column allowed in row r, or None for an
    all-zero row; `basis` holds unit-norm matrices spanning the intersection.
    """

    pattern: tuple
    dimension: int
    basis: tuple


@dataclass(frozen=True)
class RebolledoVerdict:
    """Per-operator sufficiency checks plus the compatible-element analysis."""

    per_operator: tuple
    compatible_elements: tuple
    patterns_examined: int


def rebolledo_check(
    t: KrausMap,
    masa: Masa,
    tol: Tolerance = DEFAULT_TOL,
    max_enumeration_dim: int = 5,
) -> RebolledoVerdict:
    """Does the given Kraus decomposition intertwine the masa operator-wise?

    An operator K passes iff every row of K (in masa coordinates) has its
    nonzero entries in a single column, equivalently cK - Kc = c_K·K for the
    generating element c = diag(1, ..., d) and some diagonal c_K; the
    reported residual is the weighted deviation from the best such c_K.
    The compatible-element analysis enumerates every support pattern
    (one permitted column per row, or none) and intersects its coordinate
    subspace with span{L_i}: some decomposition of T can pass the
    per-operator check only if these intersections are rich enough, so an
    all-zero outcome rules out every decomposition at once.
    """
    if t.dim != masa.dim:
        raise DimensionMismatch(f"map dim {t.dim} vs masa dim {masa.dim}")
    d = t.dim
    if d > max_enumeration_dim:
        raise PatternExplosion(
            f"{(d + 1) ** d} support patterns at dim {d} exceed the enumeration cap"
        )
    ops = [masa.to_coordinates(op) for op in t.operators]
    c = np.arange(1, d + 1, dtype=float)

    per_operator = []
    for op in ops:
        weights = np.abs(op) ** 2
        residual_sq = 0.0
        for r in range(d):
            w = weights[r]
            total = float(w.sum())
            if total <= 0.0:
                continue
            values = c[r] - c
            mean = float((w * values).sum() / total)
            residual_sq += float((w * (values - mean) ** 2).sum())
        residual = float(np.sqrt(residual_sq))
        c_mat = np.diag(c).astype(complex)
        comm_scale = max(1.0, frobenius(c_mat @ op - op @ c_mat))
        threshold = tol.threshold(comm_scale)
        per_operator.append(
            Verdict(ok=residual <= threshold, residual=residual, threshold=threshold)
        )

    stack = np.column_stack([vec(op) for op in ops])
    u_mat, sing, _ = np.linalg.svd(stack, full_matrices=False)
    span_rank = int((sing > tol.rank_cut(sing[0] if len(sing) else 0.0)).sum())
    span_basis = u_mat[:, :span_rank]

    compatible = []
    patterns_examined = 0
    for pattern in itertools.product(range(d + 1), repeat=d):
        patterns_examined += 1
        positions = [(r, pattern[r]) for r in range(d) if pattern[r] < d]
        if not positions or span_rank == 0:
            continue
        pattern_basis = np.zeros((d * d, len(positions)), dtype=complex)
        for col, (r, s) in enumerate(positions):
            e_rs = np.zeros((d, d), dtype=complex)
            e_rs[r, s] = 1
            pattern_basis[:, col] = vec(e_rs)
        joint_rank = matrix_rank_tol(np.hstack([span_basis, pattern_basis]), tol)
        dimension = span_rank + len(positions) - joint_rank
        if dimension <= 0:
            continue
        null = nullspace(np.hstack([span_basis, -pattern_basis]), tol)
        elements = []
        for idx in range(null.shape[1]):
            w_vec = span_basis @ null[:span_rank, idx]
            norm = float(np.linalg.norm(w_vec))
            if norm <= 0.0:
                continue
            w_vec = _phase_normalize_columns((w_vec / norm)[:, None])[:, 0]
            elements.append(unvec(w_vec, d))
        compatible.append(
            PatternIntersection(
                pattern=tuple(col if col < d else None for col in pattern),
                dimension=len(elements),
                basis=tuple(elements),
            )
        )
    return RebolledoVerdict(
        per_operator=tuple(per_operator),
        compatible_elements=tuple(compatible),
        patterns_examined=patterns_examined,
    )


_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _as_apply(source, dim: int | None = None):
    if isinstance(source, KrausMap):
        return source.dim, (lambda x: apply_cp(source, x))
    if isinstance(source, GkslGenerator):
        return source.dim, (lambda x: apply_generator(source, x))
    if isinstance(source, np.ndarray):
        d, sm = _as_superoperator(source)
        return d, (lambda x: unvec(sm @ vec(x), d))
    if callable(source):
        if dim is None:
            raise PreconditionFailed("a bare callable needs an explicit dimension")
        return dim, source
    raise PreconditionFailed(f"unsupported evolution source {type(source).__name__}")


def find_masa_m2(alpha_map, tol: Tolerance = DEFAULT_TOL) -> Masa:
    """Invariant masa of a *-map on M₂ whose unit image is scalar.

    The traceless self-adjoint part of the map, written in the Pauli
    coordinates as a real 3×3 matrix, always has a real eigenvalue; the masa
    generated by the corresponding eigenvector is invariant. The returned
    masa is the best real-eigenvalue candidate by direct invariance residual.
    """
    d, apply_fn = _as_apply(alpha_map, dim=2)
    if d != 2:
        raise DimensionMismatch(f"the constructive finder needs dim 2, got {d}")
    eye = np.eye(2, dtype=complex)
    unit_image = np.asarray(apply_fn(eye), dtype=complex)
    pauli_images = [np.asarray(apply_fn(s), dtype=complex) for s in _PAULI]
    scale = max(1.0, frobenius(unit_image), *[frobenius(img) for img in pauli_images])
    unit_defect = frobenius(unit_image - (np.trace(unit_image) / 2) * eye)
    if unit_defect > tol.threshold(scale):
        raise PreconditionFailed(
            f"image of the unit is not scalar, defect {unit_defect:.3e}"
        )
    for img in pauli_images:
        sa_defect = frobenius(img - dag(img))
        if sa_defect > tol.threshold(scale):
            raise PreconditionFailed(
                f"not a *-map, self-adjointness defect {sa_defect:.3e}"
            )

    r = np.zeros((3, 3))
    for a in range(3):
        for b in range(3):
            r[a, b] = float(np.trace(_PAULI[a] @ pauli_images[b]).real) / 2
    eigenvalues = np.linalg.eigvals(r)
    candidates = [
        lam for lam in eigenvalues if abs(lam.imag) <= tol.threshold(max(1.0, abs(lam)))
    ]
    if not candidates:
        # a real eigenvalue exists in exact arithmetic; take the nearest
        candidates = [min(eigenvalues, key=lambda lam: abs(lam.imag))]

    best = None
    for lam in candidates:
        _, _, vt = np.linalg.svd(r - lam.real * np.eye(3))
        y = vt[-1].real
        y = y / np.linalg.norm(y)
        generator_elt = sum(y[a] * _PAULI[a] for a in range(3))
        masa = masa_from_selfadjoint(generator_elt, tol)
        images = _rotated_projection_images(apply_fn, masa)
        residual = max(frobenius(offdiag(img)) for img in images)
        if best is None or residual < best[0]:
            best = (residual, masa)
    if best[0] > 1000 * tol.threshold(scale):
        raise NumericalFailure(
            f"no real-eigenvalue candidate yields an invariant masa "
            f"(best residual {best[0]:.3e})"
        )
    return best[1]


class _MasaSearch:
    """Local descent on the unitary group for the invariance objective."""

    def __init__(self, superop: np.ndarray, dim: int):
        self.s = superop
        self.d = dim

    def _rotated(self, u: np.ndarray) -> np.ndarray:
        return np.kron(u.T, dag(u)) @ self.s @ np.kron(u.conj(), u)

    def _parts(self, u: np.ndarray):
        d = self.d
        s_rot = self._rotated(u)
        gs = [unvec(s_rot[:, k * d + k], d) for k in range(d)]
        hs = [offdiag(g) for g in gs]
        value = sum(frobenius(h) ** 2 for h in hs)
        return value, s_rot, gs, hs

    def objective(self, u: np.ndarray) -> float:
        return self._parts(u)[0]

    def gradient(self, u: np.ndarray):
        d = self.d
        value, s_rot, gs, hs = self._parts(u)
        s_dag = dag(s_rot)
        grad = np.zeros((d, d), dtype=complex)
        for k in range(d):
            g, h = gs[k], hs[k]
            m = unvec(s_dag @ vec(h), d)
            e_kk = np.zeros((d, d), dtype=complex)
            e_kk[k, k] = 1
            grad += dag(h) @ g - g @ dag(h) + e_kk @ dag(m) - dag(m) @ e_kk
        return value, (dag(grad) - grad) / 2

    def descend(self, u0: np.ndarray, max_iters: int, step0: float = 0.1):
        u = u0
        value, direction = self.gradient(u)
        step = step0
        for _ in range(max_iters):
            norm = frobenius(direction)
            if norm < 1e-14 or value < 1e-24:
                break
            unit_dir = direction / norm
            improved = False
            while step > 1e-10:
                candidate = u @ expm_skew(-step * unit_dir)
                candidate_value = self.objective(candidate)
                if candidate_value < value:
                    u = candidate
                    value, direction = self.gradient(u)
                    step = min(step * 1.2, 0.5)
                    improved = True
                    break
                step *= 0.5
            if not improved:
                break
        return u, value


def search_masa(
    objective_source,
    restarts: int = 200,
    seed: int = 42,
    tol: Tolerance = DEFAULT_TOL,
    max_iters: int = 150,
) -> tuple[Masa, float]:
    """Multi-start descent for an invariant masa of a map or generator.

    Minimizes the summed squared off-diagonal mass of the rotated projection
    images over the unitary group; returns the best masa found and the
    square root of the best objective value, which matches the invariance
    residual scale. Deterministic given the seed. A residual bounded away
    from zero is numerical evidence of nonexistence, not a proof.
    """
    if restarts < 1:
        raise PreconditionFailed("restarts must be positive")
    d, superop = _as_superoperator(objective_source)
    search = _MasaSearch(superop, d)
    best_u = np.eye(d, dtype=complex)
    best_value = search.objective(best_u)
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        u, value = search.descend(haar_unitary(rng, d), max_iters=max_iters)
        if value < best_value:
            best_u, best_value = u, value
        if np.sqrt(max(best_value, 0.0)) < tol.atol / 10:
            break
    return Masa(best_u), float(np.sqrt(max(best_value, 0.0)))


def _skew_from_params(params: np.ndarray, d: int) -> np.ndarray:
    skew = np.zeros((d, d), dtype=complex)
    skew[np.diag_indices(d)] = 1j * params[:d]
    idx = d
    for a in range(d):
        for b in range(a + 1, d):
            z = params[idx] + 1j * params[idx + 1]
            skew[a, b] = z
            skew[b, a] = -np.conj(z)
            idx += 2
    return skew


def search_invariant_projections(
    gen: GkslGenerator, seed: int = 42, tol: Tolerance = DEFAULT_TOL
) -> list:
    """Heuristic search for projections commuting with their own image.

    Minimizes ‖[q, L(q)]‖_F over projections of each intermediate rank,
    parameterized by a unitary column frame; 0 and 1 are always included
    with residual 0. Returns (projection, residual) pairs whose residual
    falls below the tolerance threshold, best first.
    """
    d = gen.dim
    results = [
        (np.zeros((d, d), dtype=complex), 0.0),
        (np.eye(d, dtype=complex), 0.0),
    ]
    scale = max(1.0, frobenius(generator_superoperator(gen)))
    cut = tol.threshold(scale)
    n_params = d * d

    def objective_for(rank: int):
        def objective(params: np.ndarray) -> float:
            u = expm_skew(_skew_from_params(params, d))
            frame = u[:, :rank]
            q = frame @ dag(frame)
            lq = apply_generator(gen, q)
            return frobenius(q @ lq - lq @ q) ** 2

        return objective

    found = []
    for rank in range(1, d):
        objective = objective_for(rank)
        for trial in range(20):
            rng = np.random.default_rng([seed, rank, trial])
            start = 0.7 * rng.standard_normal(n_params)
            outcome = scipy.optimize.minimize(
                objective,
                start,
                method="BFGS",
                jac="3-point",
                options={"gtol": 1e-12, "maxiter": 400},
            )
            residual = float(np.sqrt(max(outcome.fun, 0.0)))
            if residual > cut:
                continue
            u = expm_skew(_skew_from_params(outcome.x, d))
            frame = u[:, :rank]
            q = frame @ dag(frame)
            if any(frobenius(q - prev) <= 1e-8 for prev, _ in found):
                continue
            found.append((q, residual))
    found.sort(key=lambda item: item[1])
    return results + found


def classical_restriction(source, masa: Masa, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Classical kernel of an invariant evolution on the masa's projections.

    Entry (k, l) is the u_k-component of the image of the l-th minimal
    projection, so diag vectors evolve by matrix action: a Q-matrix for a
    Markov generator, a stochastic matrix for a unital CP map.
    """
    if isinstance(source, KrausMap):
        verdict = is_invariant_map(source, masa, tol)
    elif isinstance(source, GkslGenerator):
        verdict = is_invariant_generator(source, masa, tol)
    else:
        raise PreconditionFailed(f"unsupported evolution source {type(source).__name__}")
    if not verdict.ok:
        raise NotInvariant(
            f"masa is not invariant, residual {verdict.residual:.3e} "
            f"exceeds {verdict.threshold:.3e}"
        )
    d, apply_fn = _as_apply(source)
    images = _rotated_projection_images(apply_fn, masa)
    a = np.zeros((d, d))
    imag_worst = 0.0
    for l, img in enumerate(images):
        diag = np.diagonal(img)
        a[:, l] = diag.real
        imag_worst = max(imag_worst, float(np.abs(diag.imag).max()))
    if imag_worst > 10 * tol.threshold(max(1.0, float(np.abs(a).max()))):
        raise NumericalFailure(
            f"projection images have non-real diagonal, defect {imag_worst:.3e}"
        )
    return a
