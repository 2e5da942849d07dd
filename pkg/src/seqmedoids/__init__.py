"""k-medoids clustering of data sequences by distributional distance."""

from .geometry import (
    Bound,
    BoundParameters,
    ClusterGeometry,
    Estimate,
    cluster_geometry,
    dist_between_distributions,
    error_bound,
    lemma_tail_bound,
    threshold_from_omega,
)
from .kmedoids import (
    ClusteringResult,
    assign_to_centers,
    cluster_known_k,
    init_centers_known_k,
    update_medoids,
)
from .metrics import (
    DimensionError,
    DistanceMetric,
    EmpiricalCdf,
    ExponentialKernel,
    ecdf_eval,
    ks_distance_seq,
    ks_distance_to_cdf,
    ks_metric,
    mmd2_unbiased,
    mmd_metric,
    pairwise_distance_matrix,
)
from .unknown_k import (
    ThresholdConfig,
    cluster_merge_based,
    cluster_split_based,
    merge_centers,
    merge_init,
)

__version__ = "0.1.0"
