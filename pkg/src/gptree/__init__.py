"""GP-Tree: an in-memory spatial index over adaptive grid cells in a prefix tree."""

from .geometry import (
    Envelope,
    Geometry,
    GeometryError,
    Segment,
    SpatialObject,
    THETA_CONTAINS,
    THETA_INTERSECTS,
    clip_to_cells,
    distance,
    envelope,
    exact_predicate,
    rect_relation,
    segments,
    sweep_line_intersects,
)
from .wkt import WktParseError, format_wkt, parse_wkt
from .grid import (
    CellCode,
    DecompositionConfig,
    GridCell,
    GridExtent,
    WORLD_EXTENT,
    cell_bounds,
    children,
    convert_cells,
    decode,
    decompose,
    encode,
    extend_cells,
    is_ancestor,
    merge_cells,
    neighbors,
    parent,
)
from .tree import GPTree, IndexNode, LookupTable, build, build_index, node_optimization, optimize_tree, prune, stats
from .snapshot import load_index, save_index
from .queries import (
    GHSI,
    CandidateMatch,
    QueryStats,
    build_ghsi,
    eps_distance_query,
    extend_query_cells,
    ghsi_analytic_bytes,
    knn_query,
    range_query,
    refine_candidate,
    unviewed_cells,
)
from .baseline import EpsDistance, Knn, Range, StrTree, oracle_query, str_build, str_query
from .synth import SynthSpec, generate_synthetic
from .bench import (
    BenchmarkDivergence,
    DatasetError,
    MetricsReport,
    Workload,
    export_reports,
    ingest,
    run_benchmark,
)

__version__ = "0.1.0"
