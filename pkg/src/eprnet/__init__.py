"""Single-source entanglement distribution over fiber: routing,
fair spectrum allocation, and source-placement experiments."""

from .allocation import (
    Allocation,
    AllocationError,
    AllocationInstance,
    ExactResult,
    bezakova_matching,
    channels_by_pair,
    exact_maxmin,
    first_fit,
    fractional_optimum,
    lp_round,
    modified_lpt,
    random_balanced,
    received_rates,
    round_robin,
)
from .harness import (
    ALL_STRATEGIES,
    ORDER_SENSITIVE,
    ConfigError,
    ExperimentConfig,
    ExperimentReport,
    SweepRow,
    allocate_once,
    config_from_json,
    derive_seed,
    emit_csv,
    emit_plot,
    read_csv_rows,
    run_placement_sweep,
    splitmix64,
)
from .metrics import (
    MetricReport,
    MetricsError,
    compute_report,
    jain_index,
    normalization_reference,
    normalized_min_rate,
)
from .netgraph import (
    GraphEdge,
    Link,
    LossParams,
    Node,
    PhysicalTopology,
    RoutingGraph,
    TopologyError,
    build_routing_graph,
    bundled_topology,
    gen_vertex,
    in_port,
    link_distance,
    load_topology,
    mem_vertex,
    out_port,
    topology_from_dict,
    transmittance,
)
from .routing import (
    DisjointPair,
    RoutePlan,
    RouteTable,
    RoutingError,
    all_pair_routes,
    pair_route,
    route_nodes,
    suurballe_disjoint_pair,
)
from .spectrum import (
    SPEED_OF_LIGHT_NM_THZ,
    ChannelGrid,
    RateVector,
    SpectrumProfile,
    channel_bandwidth,
    channel_center_frequency,
    channel_center_wavelength,
    generation_rates,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
