"""Surprise-based evaluation and maximization of graph partitions."""

from .errors import DomainError, GenerationError, ParseError, SmaxError
from .graph import (
    Graph,
    Partition,
    graph_summary,
    parse_edge_list,
    parse_partition,
    write_edge_list,
    write_partition,
)
from .metrics import (
    QualityScore,
    SurpriseInputs,
    ViResult,
    log_binomial,
    modularity,
    partition_counts,
    quality,
    surprise,
    surprise_of,
    variation_of_information,
)

__version__ = "0.1.0"
