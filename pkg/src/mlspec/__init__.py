"""Spectral community detection for multi-layer networks via adaptive
convex layer aggregation."""

from .aggregate import WeightVector, project_simplex, two_step, weighted_adjacency
from .baselines import GridSpec, grid_search_oracle, mean_adjacency, module_allegiance, speck
from .clustering import aligned_confusion, ari, gmm_fit, kmeans, misclustering_error
from .isc import IscConfig, estimate_pq, run_isc, weight_from_pq
from .models import (
    Labeling,
    MppmParams,
    MsbmParams,
    MultiLayerNetwork,
    mppm_to_msbm,
    sample_labels,
    sample_msbm,
)
from .scme import ScmeConfig, eval_g, grad_g, run_scme, scme_step
from .spectral import Embedding, eig_sym, eigenratio, embed
from .theory import (
    CenterSet,
    SnrValue,
    asymptotic_error,
    eigenratio_limit,
    embedding_centers,
    nu_basis,
    optimal_weight,
    tau,
)

__version__ = "0.1.0"
