"""Ground-cost adversarial optimal transport.

Discrete regularized OT solvers, their adversarial-cost duals, subspace
robust Wasserstein distances and the associated metric-learning pipelines.
"""

from advot.measures import (
    Histogram,
    PointCloud,
    load_point_cloud,
    save_point_cloud,
    squared_euclidean_cost,
    mahalanobis_cost,
    check_marginals,
    clip_plan,
)
from advot.exact import ExactSolution, DualPotentials, solve_exact, separable_value
from advot.regularizers import (
    Entropy,
    PowerP,
    MatrixNormRegularizer,
    LinearizedRegularizer,
    reg_eval,
    reg_conjugate,
    reg_conjugate_grad,
    linearize,
    linearized_eval,
)
from advot.entropic import (
    SinkhornSolution,
    sinkhorn,
    alternating_dual_solve,
    quadratic_row_solve,
    separable_adversarial_cost,
    dual_objective,
)
from advot.adversarial import (
    AscentConfig,
    AscentTrace,
    danskin_subgradient,
    ascend_nonneg_cost,
    adversarial_cost_from_plan,
    primal_from_cost,
    norm_adversarial_ascent,
)
from advot.srw import (
    TsrwConfig,
    displacement_second_moment,
    capped_simplex_project,
    project_Rk,
    srw,
    bures,
    bures_grads,
    tsrw,
)
from advot.metric_learning import (
    GroupedMeasures,
    kmeans_palette,
    learn_separating_omega,
    barycentric_projection,
    color_transfer,
    mds_embed,
)

__all__ = [
    "Histogram",
    "PointCloud",
    "load_point_cloud",
    "save_point_cloud",
    "squared_euclidean_cost",
    "mahalanobis_cost",
    "check_marginals",
    "clip_plan",
    "ExactSolution",
    "DualPotentials",
    "solve_exact",
    "separable_value",
    "Entropy",
    "PowerP",
    "MatrixNormRegularizer",
    "LinearizedRegularizer",
    "reg_eval",
    "reg_conjugate",
    "reg_conjugate_grad",
    "linearize",
    "linearized_eval",
    "SinkhornSolution",
    "sinkhorn",
    "alternating_dual_solve",
    "quadratic_row_solve",
    "separable_adversarial_cost",
    "dual_objective",
    "AscentConfig",
    "AscentTrace",
    "danskin_subgradient",
    "ascend_nonneg_cost",
    "adversarial_cost_from_plan",
    "primal_from_cost",
    "norm_adversarial_ascent",
    "TsrwConfig",
    "displacement_second_moment",
    "capped_simplex_project",
    "project_Rk",
    "srw",
    "bures",
    "bures_grads",
    "tsrw",
    "GroupedMeasures",
    "kmeans_palette",
    "learn_separating_omega",
    "barycentric_projection",
    "color_transfer",
    "mds_embed",
]

__version__ = "0.1.0"
