"""Learn linear data filters that keep one binary labeling task highly
discriminable while suppressing a second, distractor task."""

from .data import ClassSplit, Dataset, Task, split_by_task
from .errors import (
    DegenerateMeansWarning,
    DimensionMismatchError,
    EmptyClassError,
    EmptyPairsError,
    EpsilonFloorWarning,
    FilterLearnError,
    FormatError,
    IndexOutOfRangeError,
    InvalidCorrelationError,
    LineSearchWarning,
    NonFiniteError,
    SingularSystemError,
    SingularWithinError,
    UsageError,
    ZeroDirectionError,
)
from .evaluation import (
    EvalReport,
    LdaClassifier,
    covariate_shift_experiment,
    evaluate,
    make_pairs,
    separable,
    train_lda,
    two_afc,
)
from .fisher import (
    COND_LIMIT,
    FisherStats,
    compute_stats,
    fisher_j,
    fisher_j_star,
    optimal_discriminant,
)
from .filters import (
    FilteredDataset,
    FilterKind,
    FilterParams,
    apply_filter,
    apply_filter_adjoint,
    apply_filter_batch,
    clipped_convolve,
    clipped_convolve_adjoint,
    conv_jacobian_shift,
    filter_jacobian_column,
    random_filter,
)
from .objective import (
    DescentTrace,
    ObjectiveConfig,
    TraceEntry,
    minimize,
    ratio_gradient,
    ratio_objective,
)
from .reconstruction import (
    ReconstructionModel,
    fit_reconstruction,
    reconstruct,
    reconstruct_batch,
)
from .synthdata import (
    CorrelationSpec,
    LineImageSpec,
    gen_correlated_lines,
    gen_line_images,
    gen_two_task_points,
)

__version__ = "0.1.0"
