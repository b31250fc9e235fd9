"""QPU hardware-graph generation, minor embedding and clique-capacity sweeps."""

from .embedding import (
    ChainStats,
    EmbedParams,
    Embedding,
    EmbeddingFailure,
    ValidityReport,
    Violation,
    chain_stats,
    find_embedding,
    verify_embedding,
)
from .evaluation import (
    MaxCliqueResult,
    NormalizedPoint,
    QpuRecord,
    TrendSummary,
    max_embeddable_clique,
    normalize,
    run_sweep,
    trend_summary,
)
from .graph import (
    Graph,
    GraphError,
    TopologyMetrics,
    UndefinedMetricError,
    degree_stats,
    modularity,
    modularity_partition,
    read_edgelist,
    regularity,
    topology_metrics,
    write_edgelist,
)
from .topology import (
    GraphicalityError,
    HavelHakimiParams,
    QpuConfig,
    ZephyrParams,
    desk_configs,
    havel_hakimi_graph,
    sweep_configs,
    zephyr_graph,
)

__version__ = "0.1.0"
