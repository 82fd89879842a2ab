"""Convex layer aggregation: weight vectors on the unit simplex (with a
signed variant for mixed assortative/dis-assortative structure), weighted
adjacency formation, and the end-to-end two-step detection pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import Labeling, MultiLayerNetwork
from .spectral import embed

__all__ = ["WeightVector", "project_simplex", "weighted_adjacency", "two_step"]


@dataclass(frozen=True)
class WeightVector:
    """Length-L convex-combination weights.

    ``simplex`` mode: w >= 0 and sum(w) = 1.
    ``signed`` mode: sum(|w|) = 1 (mixed-structure extension; negative
    weights flag dis-assortative layers).
    """

    w: np.ndarray
    mode: str = "simplex"

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.w, dtype=float))
        object.__setattr__(self, "w", w)
        if self.mode == "simplex":
            if np.any(w < -1e-10) or abs(w.sum() - 1.0) > 1e-10:
                raise ValueError("simplex-mode weights must be >= 0 and sum to 1")
        elif self.mode == "signed":
            if abs(np.abs(w).sum() - 1.0) > 1e-10:
                raise ValueError("signed-mode weights must have sum(|w|) = 1")
        else:
            raise ValueError(f"unknown weight mode {self.mode!r}")

    @property
    def L(self) -> int:
        return self.w.shape[0]


def project_simplex(v) -> WeightVector:
    """Euclidean projection onto the unit simplex {w >= 0, sum w = 1}.

    Sort-and-threshold algorithm: the largest rho with
    sorted_v[rho] - (cumsum - 1)/(rho+1) > 0 determines the shift.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u - css / np.arange(1, v.size + 1) > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    w = np.maximum(v - theta, 0.0)
    w /= w.sum()  # exact renormalization guards float drift
    return WeightVector(w=w, mode="simplex")


def weighted_adjacency(net: MultiLayerNetwork, w) -> np.ndarray:
    """Weighted aggregate sum_l w_l * A^(l)."""
    weights = w.w if isinstance(w, WeightVector) else np.atleast_1d(np.asarray(w, dtype=float))
    if weights.shape[0] != net.L:
        raise ValueError(f"weight length {weights.shape[0]} != L = {net.L}")
    out = np.zeros((net.n, net.n))
    for wl, layer in zip(weights, net.layers):
        if wl != 0.0:
            out += wl * layer
    return out


def two_step(
    net: MultiLayerNetwork,
    w,
    K: int,
    method: str = "kmeans",
    cfg: dict | None = None,
    seed: int = 0,
) -> Labeling:
    """Aggregate with weights ``w``, embed with the K leading
    magnitude-ordered eigenvectors, and cluster the embedded rows."""
    from . import clustering  # deferred: clustering imports models too

    if K < 2:
        raise ValueError("need K >= 2")
    a = weighted_adjacency(net, w)
    points = embed(a, K).points
    cfg = cfg or {}
    if method == "kmeans":
        return Labeling(clustering.kmeans(points, K, cfg=cfg, seed=seed).labels.labels)
    if method == "gmm":
        return Labeling(clustering.gmm_fit(points, K, cfg=cfg, seed=seed).labels.labels)
    raise ValueError(f"unknown clustering method {method!r}")
