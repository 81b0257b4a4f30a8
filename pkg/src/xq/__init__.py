"""xq: quantify the explainability of tabular black-box predictors.

The headline score combines three predicates: the reciprocal input-chunk
count, the reciprocal output-chunk count, and the complement of feature
interaction strength computed from partial dependence.
"""

__version__ = "0.1.0"

from .chunking import (
    Chunk,
    ChunkSpec,
    ConstructedFeature,
    apply_construction,
    construct_features,
    contribution_breakdown,
    count_chunks,
    load_chunk_spec,
    singleton_spec,
)
from .errors import (
    DataError,
    ModelError,
    ProtocolError,
    PurityViolationError,
    UndefinedCorrelationError,
    WeightError,
    XQError,
)
from .experiment import (
    ComparisonTable,
    ExperimentConfig,
    SyntheticSpec,
    domain_subset,
    generate_synthetic,
    run_comparison,
)
from .external import ExternalModel, connect_external
from .interaction import InteractionReport, h_one_vs_rest, interaction_strength
from .partial_dependence import PDGrid, PDGrid2, evaluation_rows, pd_curve, pd_surface
from .predictor import (
    KnnModel,
    LinearModel,
    Predictor,
    ProductModel,
    build_model,
    fit_knn,
    fit_linear,
)
from .report import (
    build_experiment_report,
    build_score_report,
    check_report,
    export_plotdata,
    load_report,
    validate_report,
    write_report,
)
from .score import (
    ExplainabilityScore,
    WeightVector,
    score_basic,
    score_global,
    score_local,
    score_penalized,
    score_segregated,
)
from .tabular import (
    ColumnMeta,
    Dataset,
    from_columns,
    load_csv,
    pearson_correlation,
    sample_rows,
    write_csv,
)
