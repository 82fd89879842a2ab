"""Generative models: multi-layer stochastic block model (MSBM) and the
planted partition special case (MPPM), plus community label sampling.

All samplers are pure functions of (parameters, seed).  Layers are stored
as dense symmetric float matrices with an exactly-zero diagonal (no
self-loops).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._rng import make_rng

__all__ = [
    "MsbmParams",
    "MppmParams",
    "MultiLayerNetwork",
    "Labeling",
    "sample_labels",
    "sample_msbm",
    "mppm_to_msbm",
]


@dataclass(frozen=True)
class MsbmParams:
    """Parameters of a multi-layer stochastic block model.

    Attributes
    ----------
    n : int
        Number of nodes.
    K : int
        Number of communities (>= 2).
    omega : np.ndarray, shape (L, K, K)
        Per-layer symmetric connectivity matrices, entries in [0, 1].
    pi : np.ndarray, shape (K,)
        Community proportions, positive, summing to 1.
    """

    n: int
    K: int
    omega: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        omega = np.atleast_3d(np.asarray(self.omega, dtype=float))
        if omega.ndim != 3 or omega.shape[1] != omega.shape[2]:
            raise ValueError("omega must be an (L, K, K) array")
        pi = np.asarray(self.pi, dtype=float)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "pi", pi)
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.K < 2 or omega.shape[1] != self.K:
            raise ValueError("K must be >= 2 and match omega")
        if pi.shape != (self.K,):
            raise ValueError("pi must have length K")
        if np.any(pi <= 0) or abs(pi.sum() - 1.0) > 1e-12:
            raise ValueError("pi entries must be positive and sum to 1")
        for ell in range(self.L):
            if not np.array_equal(omega[ell], omega[ell].T):
                raise ValueError(f"omega[{ell}] is not symmetric")
        # Probabilities 0 and 1 are admitted (the benchmark grids use q=0).
        if np.any(omega < 0) or np.any(omega > 1):
            raise ValueError("omega entries must lie in [0, 1]")

    @property
    def L(self) -> int:
        return self.omega.shape[0]


@dataclass(frozen=True)
class MppmParams:
    """Planted partition parameters: per-layer within-community probability
    ``p`` and between-community probability ``q``."""

    n: int
    K: int
    p: np.ndarray
    q: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        pi = np.asarray(self.pi, dtype=float)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "pi", pi)
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.K < 2:
            raise ValueError("K must be >= 2")
        if p.shape != q.shape or p.ndim != 1:
            raise ValueError("p and q must be 1-d with equal length")
        if np.any(p < 0) or np.any(p > 1) or np.any(q < 0) or np.any(q > 1):
            raise ValueError("p and q entries must lie in [0, 1]")
        if pi.shape != (self.K,):
            raise ValueError("pi must have length K")
        if np.any(pi <= 0) or abs(pi.sum() - 1.0) > 1e-12:
            raise ValueError("pi entries must be positive and sum to 1")

    @property
    def L(self) -> int:
        return self.p.shape[0]


@dataclass(frozen=True)
class Labeling:
    """Community assignment: length-n integers in {0, ..., K-1}."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be 1-d")
        if labels.size and labels.min() < 0:
            raise ValueError("labels must be nonnegative")
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def check_k(self, K: int) -> None:
        if self.labels.size and self.labels.max() >= K:
            raise ValueError(f"label {self.labels.max()} out of range for K={K}")


@dataclass(frozen=True)
class MultiLayerNetwork:
    """L symmetric n x n adjacency layers (binary or real-valued) sharing a
    node set.  Diagonals are exactly zero."""

    n: int
    layers: list = field(default_factory=list)

    def __post_init__(self):
        layers = [np.asarray(a, dtype=float) for a in self.layers]
        object.__setattr__(self, "layers", layers)
        for ell, a in enumerate(layers):
            if a.shape != (self.n, self.n):
                raise ValueError(f"layer {ell} has shape {a.shape}, expected ({self.n}, {self.n})")
            if not np.array_equal(a, a.T):
                raise ValueError(f"layer {ell} is not symmetric")
            if np.any(np.diagonal(a) != 0.0):
                raise ValueError(f"layer {ell} has a nonzero diagonal")

    @property
    def L(self) -> int:
        return len(self.layers)


def sample_labels(n: int, pi, mode: str = "multinomial", seed: int = 0) -> Labeling:
    """Sample community labels.

    ``multinomial`` draws labels i.i.d. with P(c_i = k) = pi_k.
    ``exact-balanced`` returns a uniformly random assignment with exactly
    n/K nodes per community (requires K | n).
    """
    pi = np.atleast_1d(np.asarray(pi, dtype=float))
    K = pi.shape[0]
    if n < K:
        raise ValueError("need n >= K")
    rng = make_rng(seed, "labels")
    if mode == "multinomial":
        labels = rng.choice(K, size=n, p=pi / pi.sum())
    elif mode == "exact-balanced":
        if n % K != 0:
            raise ValueError(f"exact-balanced mode requires K={K} to divide n={n}")
        labels = np.repeat(np.arange(K), n // K)
        rng.shuffle(labels)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return Labeling(labels)


def sample_msbm(params: MsbmParams, labels: Labeling, seed: int = 0) -> MultiLayerNetwork:
    """Sample an MSBM realization conditional on ``labels``.

    For each layer and each unordered pair i < j, an edge is drawn
    Bernoulli(omega[c_i, c_j]) independently; the matrix is symmetrized
    and the diagonal is zero.  Each layer uses a sub-seed derived from
    (seed, layer), so layer sampling order is irrelevant.
    """
    labels.check_k(params.K)
    if labels.n != params.n:
        raise ValueError("labels length must equal params.n")
    n = params.n
    c = labels.labels
    layers = []
    # Row blocks keep peak memory bounded at desk scale (n up to ~10^4).
    block = max(1, min(n, int(2e7) // max(n, 1)))
    for ell in range(params.L):
        rng = make_rng(seed, "layer", ell)
        a = np.zeros((n, n))
        prob_rows = params.omega[ell][c]  # (n, K)
        for start in range(0, n, block):
            stop = min(start + block, n)
            u = rng.random((stop - start, n))
            a[start:stop] = u < prob_rows[start:stop][:, c]
        # keep strict upper triangle only, then symmetrize
        a = np.triu(a, k=1)
        a = a + a.T
        layers.append(a)
    return MultiLayerNetwork(n=n, layers=layers)


def mppm_to_msbm(params: MppmParams) -> MsbmParams:
    """Expand planted partition parameters to full connectivity matrices:
    p on the diagonal, q off the diagonal."""
    K = params.K
    omega = np.empty((params.L, K, K))
    for ell in range(params.L):
        omega[ell] = (params.p[ell] - params.q[ell]) * np.eye(K) + params.q[ell] * np.ones((K, K))
    return MsbmParams(n=params.n, K=K, omega=omega, pi=params.pi)
