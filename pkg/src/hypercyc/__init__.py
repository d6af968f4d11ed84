"""Structure and orbit dynamics of finitely generated commuting matrix
semigroups on C^n: block-triangular normal forms, the rank test that
obstructs dense orbits, empirical density certification on epsilon-grids,
extended-limit-set scoring, and the diagonal locally-hypercyclic
counterexample construction."""

__version__ = "0.1.0"

from .algebra import (
    GeneratorFamily,
    LogDiagonal,
    Word,
    is_in_K,
    verify_commuting,
    word_apply,
    word_log_diagonal,
    word_matrix,
)
from .counterexample import (
    CounterexampleFamily,
    DensePair,
    build_counterexample,
    find_dense_pair,
    pair_density_score,
    reproduce_theorem,
    verify_line_structure,
    witness_sequence,
)
from .dynamics import (
    EMPIRICALLY_HYPERCYCLIC,
    INCONCLUSIVE,
    NOT_HYPERCYCLIC,
    CertifyConfig,
    CertifyResult,
    DensityReport,
    DiagonalWordScan,
    JsetScore,
    OrbitCloud,
    WordBudget,
    basis_jset_probe,
    box_coverage,
    certify_hypercyclic,
    distance_to_ball_image,
    enumerate_words,
    jset_score,
    orbit_sample,
    word_count,
)
from .errors import (
    BadDimension,
    BadPartition,
    BudgetOverflow,
    ClusteringAmbiguous,
    DimensionMismatch,
    GridTooLarge,
    HypercycError,
    IllConditioned,
    NoBasisVectorInU,
    NoPairFound,
    NotCommuting,
    NotTriangularForm,
    ParseError,
    ZeroCoordinate,
)
from .io import dump_family, load_family, validate_roundtrip
from .normal_form import (
    NormalForm,
    ReferenceFrame,
    build_normal_form,
    common_spectral_split,
    reference_frame,
)
from .structure import (
    BlockStructureReport,
    Subspace,
    f_subspace,
    h_subspace,
    invariance_residual,
    jdense_locus_bound,
    rank_condition,
)
