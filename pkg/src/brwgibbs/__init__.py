"""Sampling and verification toolkit for branching random walk Gibbs measures."""

from .errors import (
    BrwError,
    CapExceeded,
    DepthExceeded,
    DomainError,
    ModelError,
    NumericalFailure,
    ShapeMismatch,
)
from .gibbs import (
    LeafDistribution,
    LogPartition,
    derivative_partition,
    entropy,
    gibbs_distribution,
    kl_divergence,
    kl_gibbs_pair,
    log_partition,
    restricted_gibbs,
    sample_leaf,
)
from .hardness import (
    SearchRecord,
    exceptional_probability,
    is_exceptional,
    max_tail_probe,
    naive_search,
    rescaled_path,
)
from .increments import (
    Family,
    IncrementModel,
    critical_beta,
    free_energy,
    log_mgf,
    log_mgf_derivative,
    max_speed,
    parse_model,
)
from .sampler import (
    RunRecord,
    algorithm_law,
    kl_algorithm_exact,
    kl_statistics,
    recursive_sample,
    running_time,
)
from .tree import (
    BrwInstance,
    QueryLedger,
    child_increments,
    enumerate_leaf_values,
    max_value,
    vertex_value,
)

__version__ = "0.1.0"
