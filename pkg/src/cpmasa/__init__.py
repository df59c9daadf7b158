"""Invariant masas of completely positive maps and Markov generators on M_d.

Decision procedures, coefficient-criterion solvers, gauge-equivalence
witnesses for Lindblad presentations, constructive and heuristic masa
finders, and a pinned corpus of reference instances.
"""

from .errors import (
    AssertionFailure,
    CpmasaError,
    DegenerateSpectrum,
    DimensionMismatch,
    HypothesisFailed,
    NotInvariant,
    NotMinimal,
    NotSelfAdjoint,
    NotUnital,
    NumericalFailure,
    ParseError,
    PatternExplosion,
    PreconditionFailed,
    ToleranceInvalid,
)
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    Verdict,
    commutant_intersection,
    dag,
    expm_skew,
    frobenius,
    haar_unitary,
    hermitian_eig,
    matrix_exp,
    nullspace,
    offdiag,
    unvec,
    vec,
)
from .cpmaps import (
    DecompositionTransform,
    Inequivalent,
    KrausMap,
    apply_cp,
    choi_matrix,
    is_unital,
    kraus_transform,
    minimal_kraus,
    random_unital_kraus,
)
from .cpmaps import superoperator as map_superoperator
from .gksl import (
    GkslGenerator,
    InfeasibilityCertificate,
    SplitVerdict,
    TransformWitness,
    apply_generator,
    cp_part_diagonalizable,
    generator_from_map,
    gksl_equivalent,
    hamiltonian_part_diagonalizable,
    markov_form,
    semigroup_at,
)
from .gksl import superoperator as generator_superoperator
from .masa import (
    GeneratorCoefficientWitness,
    Infeasible,
    KrausCoefficientWitness,
    Masa,
    PatternIntersection,
    RebolledoVerdict,
    classical_restriction,
    find_masa_m2,
    is_invariant_generator,
    is_invariant_map,
    is_invariant_superoperator,
    masa_from_selfadjoint,
    rebolledo_check,
    search_invariant_projections,
    search_masa,
    solve_generator_coefficients,
    solve_kraus_coefficients,
)
from .corpus import (
    CORPUS_IDS,
    CorpusEntry,
    build_example,
    embed_corner,
    verify_example,
)

__version__ = "0.1.0"

__all__ = [
    "AssertionFailure",
    "CpmasaError",
    "DegenerateSpectrum",
    "DimensionMismatch",
    "HypothesisFailed",
    "NotInvariant",
    "NotMinimal",
    "NotSelfAdjoint",
    "NotUnital",
    "NumericalFailure",
    "ParseError",
    "PatternExplosion",
    "PreconditionFailed",
    "ToleranceInvalid",
    "DEFAULT_TOL",
    "Tolerance",
    "Verdict",
    "commutant_intersection",
    "dag",
    "expm_skew",
    "frobenius",
    "haar_unitary",
    "hermitian_eig",
    "matrix_exp",
    "nullspace",
    "offdiag",
    "unvec",
    "vec",
    "DecompositionTransform",
    "Inequivalent",
    "KrausMap",
    "apply_cp",
    "choi_matrix",
    "is_unital",
    "kraus_transform",
    "minimal_kraus",
    "random_unital_kraus",
    "map_superoperator",
    "GkslGenerator",
    "InfeasibilityCertificate",
    "SplitVerdict",
    "TransformWitness",
    "apply_generator",
    "cp_part_diagonalizable",
    "generator_from_map",
    "gksl_equivalent",
    "hamiltonian_part_diagonalizable",
    "markov_form",
    "semigroup_at",
    "generator_superoperator",
    "GeneratorCoefficientWitness",
    "Infeasible",
    "KrausCoefficientWitness",
    "Masa",
    "PatternIntersection",
    "RebolledoVerdict",
    "classical_restriction",
    "find_masa_m2",
    "is_invariant_generator",
    "is_invariant_map",
    "is_invariant_superoperator",
    "masa_from_selfadjoint",
    "rebolledo_check",
    "search_invariant_projections",
    "search_masa",
    "solve_generator_coefficients",
    "solve_kraus_coefficients",
    "CORPUS_IDS",
    "CorpusEntry",
    "build_example",
    "embed_corner",
    "verify_example",
]
