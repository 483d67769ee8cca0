"""Interference-aware topology control for wireless ad hoc networks."""

from .construct import euclidean_mst, gabriel_udg, unit_disc_graph
from .errors import (
    AnalysisError,
    ConfigError,
    ConstructionError,
    IngestionError,
    ModelError,
    OracleError,
    TopologyError,
)
from .local import run_protocol
from .model import (
    CommGraph,
    EmbeddedGraph,
    PointSet,
    build_comm_graph,
    closure,
    connected_components,
    distance,
    edge_length_extremes,
    in_T,
    interference_at,
    is_bridged,
    is_primitive,
    max_interference,
)

__version__ = "0.1.0"
