"""Exact local optima networks of small QAP instances.

The pipeline: generate or load an instance, exhaustively enumerate the
basins of attraction of best-improvement 2-swap hill climbing, build the
basin-transition network with exact rational edge weights, filter it,
and quantify its community structure with two detectors.
"""

from .community import (
    AnnealSchedule,
    Partition,
    WeightedGraph,
    greedy_modularity,
    load_graph_csv,
    modularity,
    save_partition,
    spinglass_communities,
    spinglass_hamiltonian,
)
from .errors import (
    ContractError,
    ModularityUndefinedError,
    ParseError,
    QaplonError,
    ResourceLimitError,
)
from .experiment import (
    ExperimentConfig,
    ExperimentRecord,
    SummaryResult,
    format_summary,
    load_experiment_config,
    parse_experiment_config,
    read_records_csv,
    run_experiment,
    strip_timing,
    summarize,
    write_records_csv,
    write_summary_csv,
)
from .generators import (
    GeneratorConfig,
    format_instance,
    gen_real_like,
    gen_uniform,
    generate,
    instance_seed,
    load_instance,
    save_instance,
    save_meta,
)
from .landscape import (
    MAX_EXHAUSTIVE_N,
    BasinMap,
    LocalOptimum,
    enumerate_basins,
    hill_climb,
    load_basin_map,
    save_basin_map,
)
from .lon import (
    FilteredLon,
    Lon,
    build_lon,
    export_graph,
    filter_lon,
    nearest_rank_quantile,
    node_styles,
    undirected_weights,
)
from .qap import Permutation, QapInstance, cost, neighbors, rank, swap, swap_delta, unrank
from .rng import Xoshiro256StarStar, derive_seed
from .stats import five_number, mann_whitney_u, quantile

__version__ = "0.1.0"

__all__ = [
    "AnnealSchedule",
    "BasinMap",
    "ContractError",
    "ExperimentConfig",
    "ExperimentRecord",
    "FilteredLon",
    "GeneratorConfig",
    "LocalOptimum",
    "Lon",
    "MAX_EXHAUSTIVE_N",
    "ModularityUndefinedError",
    "ParseError",
    "Partition",
    "Permutation",
    "QapInstance",
    "QaplonError",
    "ResourceLimitError",
    "SummaryResult",
    "WeightedGraph",
    "Xoshiro256StarStar",
    "build_lon",
    "cost",
    "derive_seed",
    "enumerate_basins",
    "export_graph",
    "filter_lon",
    "five_number",
    "format_instance",
    "format_summary",
    "gen_real_like",
    "gen_uniform",
    "generate",
    "greedy_modularity",
    "hill_climb",
    "instance_seed",
    "load_basin_map",
    "load_experiment_config",
    "load_graph_csv",
    "load_instance",
    "mann_whitney_u",
    "modularity",
    "nearest_rank_quantile",
    "neighbors",
    "node_styles",
    "parse_experiment_config",
    "quantile",
    "rank",
    "read_records_csv",
    "run_experiment",
    "save_basin_map",
    "save_instance",
    "save_meta",
    "save_partition",
    "spinglass_communities",
    "spinglass_hamiltonian",
    "strip_timing",
    "summarize",
    "swap",
    "swap_delta",
    "undirected_weights",
    "unrank",
    "write_records_csv",
    "write_summary_csv",
]
