"""Bounded-memory stream analytics: weighted reservoirs, approximate OLAP
densities, dynamic community detection and stream integration."""

from .components import Component, ComponentSet, UnionFind, recompute_components
from .genmodels import (ConcentrationError, ConcentrationReport, DegreeDistribution, GeneratedGraph,
                        GenerationError, concentration_check, gen_communities, gen_configuration, gen_gnp,
                        gen_pa, power_law_delta)
from .graphstream import (CommunitySnapshot, DCConfig, Edge, EdgeStreamState, FinalResult, NodeRegistry,
                          component_size_series, run_stream, write_results)
from .ingest import FilterConfig, ReplayError, TweetRecord, read_edges, replay, synth_tweets, tweet_to_edges
from .integrate import (IntegrationResult, StreamSummary, UndefinedCorrelationError, community_correlation,
                        correlation_matrix, edge_correlation_oracle, integrate, node_correlation)
from .olap import (ApproximationBudget, DensityVector, DimensionSpec, EmptyInputError, SchemaError, Tuple,
                   estimate_density, exact_density, required_sample_size)
from .reservoir import (InvalidMeasureError, OrderingError, Reservoir, UndefinedStateError, WeightedItem,
                        WindowSampler)
from .rng import RandomStream

__version__ = "0.1.0"
