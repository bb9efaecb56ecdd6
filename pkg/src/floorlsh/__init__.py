"""Floored-projection locality-sensitive hashing with verified guarantees.

The package has three layers:

* hash families of the form floor(scale * <w, x>) whose scalar products are
  provably spread out (``lpspace``, ``families``),
* a Monte Carlo laboratory that checks every claimed bound with exact
  confidence intervals (``estimation``),
* a c-approximate nearest-neighbor index that never misses a point within
  distance 1, audited against brute force (``index``, ``exact``).
"""

from .data import (
    PlantedPair,
    far_ring_dataset,
    gaussian_points,
    near_origin_queries,
    planted_pairs_dataset,
    read_pairs_truth,
    read_points,
    uniform_cube_points,
    write_pairs_truth,
    write_points,
)
from .estimation import (
    AntiConcEstimate,
    ConjectureRow,
    FalsePositiveEstimate,
    FarPairShape,
    clopper_pearson,
    conjecture_probe,
    estimate_false_positive_rate,
    estimate_small_ball,
    far_pair,
    unit_direction,
    levy_concentration,
    small_ball_bound,
    small_ball_curve,
    theoretical_q_bound,
)
from .exact import (
    GroundTruth,
    RecallRecord,
    ground_truth,
    lp_distances,
    range_search_exact,
    recall_report,
)
from .families import (
    PROVEN_ADJACENCY_KINDS,
    FamilyKind,
    HashFunction,
    adjacency_certificate,
    c_threshold,
    false_positive_bound,
    hash_eval,
    hash_function_from_bytes,
    hash_scale,
    sample_pool,
    sample_vector,
)
from .index import (
    BuildStats,
    IndexConfig,
    LshIndex,
    QueryResult,
    QueryStats,
    Variant,
    choose_levels,
)
from .lpspace import (
    BoundConstants,
    beta_lower_bound_margin,
    bound_constants,
    cap_probability,
    cube_c_threshold,
    cube_scale,
    dual_exponent,
    lp_norm,
    norm_sandwich,
    norm_sandwich_factor,
    norm_sandwich_holds,
    regularized_incomplete_beta,
    sign_c_threshold,
    sphere_c_threshold,
    sphere_scale,
)
from .streams import derive_seed, stream

__version__ = "0.1.0"

__all__ = [
    "AntiConcEstimate",
    "BoundConstants",
    "BuildStats",
    "ConjectureRow",
    "FalsePositiveEstimate",
    "FamilyKind",
    "FarPairShape",
    "GroundTruth",
    "HashFunction",
    "IndexConfig",
    "LshIndex",
    "PROVEN_ADJACENCY_KINDS",
    "PlantedPair",
    "QueryResult",
    "QueryStats",
    "RecallRecord",
    "Variant",
    "adjacency_certificate",
    "beta_lower_bound_margin",
    "bound_constants",
    "c_threshold",
    "cap_probability",
    "choose_levels",
    "clopper_pearson",
    "conjecture_probe",
    "cube_c_threshold",
    "cube_scale",
    "derive_seed",
    "dual_exponent",
    "estimate_false_positive_rate",
    "estimate_small_ball",
    "false_positive_bound",
    "far_pair",
    "far_ring_dataset",
    "gaussian_points",
    "ground_truth",
    "hash_eval",
    "hash_function_from_bytes",
    "hash_scale",
    "levy_concentration",
    "lp_distances",
    "lp_norm",
    "near_origin_queries",
    "norm_sandwich",
    "norm_sandwich_factor",
    "norm_sandwich_holds",
    "planted_pairs_dataset",
    "range_search_exact",
    "read_pairs_truth",
    "read_points",
    "recall_report",
    "regularized_incomplete_beta",
    "sample_pool",
    "sample_vector",
    "sign_c_threshold",
    "small_ball_bound",
    "small_ball_curve",
    "sphere_c_threshold",
    "sphere_scale",
    "stream",
    "theoretical_q_bound",
    "uniform_cube_points",
    "unit_direction",
    "write_pairs_truth",
    "write_points",
]
