"""agprop: approximate graph propagation on dynamic graphs.

Parameterized node-proximity queries pi = sum_i w_i (D^-a A D^-b)^i x with
(delta, c)-approximation guarantees, over an undirected graph under edge
insertions and deletions.
"""

from .engine import (BatchStats, ConvergenceError, Counters,
                     PropagationResult, QuerySpec, exact_converged,
                     exact_truncated, query_dynamic, query_static_baseline,
                     query_staticpp, run_query_batch)
from .graph import (BucketList, DynGraph, EdgeAbsentError, EdgeExistsError,
                    UpdateReport, verify_structure)
from .harness import (BenchConfig, BenchmarkReport, UpdateStream,
                      UpdateStreamConfig, apply_updates, gen_updates,
                      load_edge_list, load_update_stream, measure_error,
                      run_benchmark)
from .sampling import (RngStream, SampleOutcome, StalenessError,
                       bounded_geometric, sample_bucket_binomial,
                       sample_bucket_geometric, subset_sample_neighborhood)
from .vectors import CompactVector, ResidueMap, init_dense, init_randomized
from .weights import WeightOracle

__version__ = "0.1.0"

__all__ = [
    "BatchStats", "BenchConfig", "BenchmarkReport", "BucketList",
    "CompactVector", "ConvergenceError", "Counters", "DynGraph",
    "EdgeAbsentError", "EdgeExistsError", "PropagationResult", "QuerySpec",
    "ResidueMap", "RngStream", "SampleOutcome", "StalenessError",
    "UpdateReport", "UpdateStream", "UpdateStreamConfig", "WeightOracle",
    "apply_updates", "bounded_geometric", "exact_converged",
    "exact_truncated", "gen_updates", "init_dense", "init_randomized",
    "load_edge_list", "load_update_stream", "measure_error",
    "query_dynamic", "query_static_baseline", "query_staticpp",
    "run_benchmark", "run_query_batch", "sample_bucket_binomial",
    "sample_bucket_geometric", "subset_sample_neighborhood",
    "verify_structure",
]
