"""Approximate k-means clustering of points with missing coordinates."""

from .core import (
    Clustering,
    Dataset,
    MissingPoint,
    centroid,
    complete_centers,
    cost_on,
    distance_on,
    restrict_fd,
    restrict_pd,
    sq_distance_on,
    voronoi_assign,
)
from .kernels import BACKEND
from .oracle import ExactResult, exact_k_means, lloyd_baseline
from .sampling import SamplingParams, initial_center_sample, lambda_of, superset_sample_value
from .solver import (
    CenterTuple,
    InvariantViolation,
    ResourceLimitError,
    SolveParams,
    idealized_k_means,
    k_means_search,
    partition_by_domains,
    run_trials,
    select_pruning_set,
)

__version__ = "0.1.0"
