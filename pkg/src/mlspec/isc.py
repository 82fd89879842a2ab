"""Iterative spectral clustering: alternate spectral clustering of the
weighted aggregate with plug-in estimation of the tau-optimal weights
from per-layer within/between edge densities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .aggregate import WeightVector, weighted_adjacency
from .models import Labeling, MultiLayerNetwork
from .spectral import embed

__all__ = ["IscConfig", "IscResult", "estimate_pq", "weight_from_pq", "run_isc"]


@dataclass(frozen=True)
class IscConfig:
    epsilon0: float = 1e-3
    max_outer: int = 20
    method: str = "kmeans"
    cluster_cfg: dict = field(default_factory=dict)
    allow_signed: bool = False

    def __post_init__(self):
        if self.epsilon0 <= 0:
            raise ValueError("epsilon0 must be positive")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")


@dataclass(frozen=True)
class IscResult:
    weights: WeightVector
    labels: Labeling
    weight_trace: list
    uninformative: bool = False


def estimate_pq(layer: np.ndarray, labels: Labeling) -> tuple[float, float]:
    """Within/between edge-density estimates under ``labels``.

    p_hat averages A_ij over unordered pairs i < j with matching labels,
    q_hat over mismatching pairs; the diagonal is excluded (self-loops
    are structurally zero).
    """
    a = np.asarray(layer, dtype=float)
    c = labels.labels
    n = c.shape[0]
    if a.shape != (n, n):
        raise ValueError("layer shape must match labels length")
    same = c[:, None] == c[None, :]
    iu = np.triu_indices(n, k=1)
    same_u = same[iu]
    n_within = int(same_u.sum())
    n_between = same_u.size - n_within
    if n_within == 0 or n_between == 0:
        raise ValueError("degenerate partition: no within or no between pairs")
    vals = a[iu]
    p_hat = float(vals[same_u].sum() / n_within)
    q_hat = float(vals[~same_u].sum() / n_between)
    return p_hat, q_hat


def weight_from_pq(p_hat: float, q_hat: float, K: int, signed: bool = False) -> float:
    """Unnormalized plug-in weight
    (p - q) / [p(1-p) + (K-1) q(1-q)], denominator floored at 1e-12.

    In the default assortative mode negative values are clamped to 0;
    signed mode keeps them (mixed-structure extension).
    """
    den = p_hat * (1 - p_hat) + (K - 1) * q_hat * (1 - q_hat)
    value = (p_hat - q_hat) / max(den, 1e-12)
    if not signed and value < 0.0:
        return 0.0
    return value


def _cluster_matrix(a: np.ndarray, K: int, cfg: IscConfig, seed: int) -> Labeling:
    from . import clustering

    points = embed(a, K).points
    if cfg.method == "kmeans":
        return clustering.kmeans(points, K, cfg=cfg.cluster_cfg, seed=seed).labels
    if cfg.method == "gmm":
        return clustering.gmm_fit(points, K, cfg=cfg.cluster_cfg, seed=seed).labels
    raise ValueError(f"unknown clustering method {cfg.method!r}")


def _weights_from_labels(net, per_layer_labels, K, signed):
    raw = np.empty(net.L)
    for ell in range(net.L):
        try:
            p_hat, q_hat = estimate_pq(net.layers[ell], per_layer_labels[ell])
        except ValueError:
            raw[ell] = 0.0
            continue
        raw[ell] = weight_from_pq(p_hat, q_hat, K, signed=signed)
    return raw


def _normalize(raw: np.ndarray, signed: bool) -> tuple[np.ndarray, bool]:
    """Clamp-then-normalize; falls back to equal weights when every layer
    comes out uninformative."""
    total = np.abs(raw).sum()
    if total == 0.0:
        return np.full(raw.shape[0], 1.0 / raw.shape[0]), True
    return raw / total, False


def run_isc(net: MultiLayerNetwork, K: int, cfg: IscConfig | None = None, seed: int = 0) -> IscResult:
    """Run the iterative weight-refinement loop.

    Initialization clusters every layer separately and applies the
    plug-in weight formula; each round then clusters the weighted
    aggregate, re-estimates per-layer densities under the shared labels,
    and recomputes the weights, until the weight change drops below
    ``epsilon0`` or ``max_outer`` rounds elapse.
    """
    cfg = cfg or IscConfig()
    if K < 2:
        raise ValueError("need K >= 2")
    signed = cfg.allow_signed

    if net.L == 1:
        labels = _cluster_matrix(net.layers[0], K, cfg, seed)
        return IscResult(
            weights=WeightVector(w=np.array([1.0])),
            labels=labels,
            weight_trace=[np.array([1.0])],
        )

    per_layer = [
        _cluster_matrix(net.layers[ell], K, cfg, seed) for ell in range(net.L)
    ]
    raw = _weights_from_labels(net, per_layer, K, signed)
    w_old, uninformative = _normalize(raw, signed)
    trace = [w_old.copy()]

    labels = None
    for _ in range(cfg.max_outer):
        labels = _cluster_matrix(weighted_adjacency(net, w_old), K, cfg, seed)
        raw = _weights_from_labels(net, [labels] * net.L, K, signed)
        w_new, flat = _normalize(raw, signed)
        uninformative = uninformative or flat
        trace.append(w_new.copy())
        eps = np.linalg.norm(w_new - w_old)
        w_old = w_new
        if eps <= cfg.epsilon0:
            break

    mode = "signed" if (signed and np.any(w_old < 0)) else "simplex"
    labels = _cluster_matrix(weighted_adjacency(net, w_old), K, cfg, seed)
    return IscResult(
        weights=WeightVector(w=w_old, mode=mode),
        labels=labels,
        weight_trace=trace,
        uninformative=uninformative,
    )
