"""Simulation and inference for the d-uniform hypergraph stochastic block model."""

from .evaluate import RecoveryReport, misclassification
from .model import (
    GchResult,
    ModelParams,
    ParameterError,
    degree_profile,
    enumerate_assignments,
    gch_divergence,
    gch_threshold,
    in_xi,
    normalized_weight,
    oplus,
)
from .sampler import Hypergraph, SplitPair, sample_hsbm, sample_labels, split_hypergraph

__version__ = "0.1.0"
