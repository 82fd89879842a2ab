"""Point clustering for spectral embeddings (k-means and full-covariance
Gaussian mixtures) and partition agreement metrics (ARI, permutation-
minimized mis-clustering error, aligned confusion matrix)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import logsumexp

from ._rng import make_rng
from .models import Labeling

__all__ = [
    "KmeansResult",
    "GmmResult",
    "kmeans",
    "gmm_fit",
    "ari",
    "misclustering_error",
    "aligned_confusion",
]


@dataclass(frozen=True)
class KmeansResult:
    labels: Labeling
    centers: np.ndarray
    objective: float
    # objective after each Lloyd update of the winning restart
    objective_trace: tuple = ()


@dataclass(frozen=True)
class GmmResult:
    labels: Labeling
    means: np.ndarray
    covariances: np.ndarray
    mixing: np.ndarray
    loglik: float
    degenerate: bool = False
    # log-likelihood at each E-step (reinit rounds excluded)
    loglik_trace: tuple = ()


def _kpp_init(points: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding (distance-proportional sampling)."""
    n = points.shape[0]
    centers = np.empty((K, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for k in range(1, K):
        total = d2.sum()
        if total <= 0.0:
            centers[k] = points[rng.integers(n)]
            continue
        centers[k] = points[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((points - centers[k]) ** 2, axis=1))
    return centers


def _assign(points: np.ndarray, centers: np.ndarray):
    d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(points.shape[0]), labels].sum()


def _lloyd(points: np.ndarray, K: int, rng: np.random.Generator, max_iter: int, tol: float):
    centers = _kpp_init(points, K, rng)
    labels, obj = _assign(points, centers)
    trace = [obj]
    for _ in range(max_iter):
        for k in range(K):
            mask = labels == k
            if mask.any():
                centers[k] = points[mask].mean(axis=0)
            else:
                # empty cluster: reseed at the point farthest from its center
                gaps = np.sum((points - centers[labels]) ** 2, axis=1)
                centers[k] = points[np.argmax(gaps)]
        labels, new_obj = _assign(points, centers)
        trace.append(new_obj)
        if obj - new_obj <= tol * max(obj, 1e-300):
            obj = new_obj
            break
        obj = new_obj
    return labels, centers, obj, trace


def kmeans(points: np.ndarray, K: int, cfg: dict | None = None, seed: int = 0) -> KmeansResult:
    """Lloyd's algorithm from k-means++ starts; best of ``restarts``
    independent runs by objective (ties broken by restart index)."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < K:
        raise ValueError("points must be (n, d) with n >= K")
    cfg = cfg or {}
    restarts = int(cfg.get("restarts", 10))
    max_iter = int(cfg.get("max_iter", 100))
    tol = float(cfg.get("tol", 1e-6))

    best = None
    for r in range(restarts):
        rng = make_rng(seed, "kmeans", r)
        labels, centers, obj, trace = _lloyd(points, K, rng, max_iter, tol)
        if best is None or obj < best[2]:
            best = (labels, centers, obj, trace)
    labels, centers, obj, trace = best
    return KmeansResult(
        labels=Labeling(labels),
        centers=centers,
        objective=float(obj),
        objective_trace=tuple(trace),
    )


def _log_gauss(points: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    d = points.shape[1]
    chol = np.linalg.cholesky(cov)
    y = np.linalg.solve(chol, (points - mean).T)
    maha = np.sum(y * y, axis=0)
    logdet = 2.0 * np.sum(np.log(np.diagonal(chol)))
    return -0.5 * (d * np.log(2.0 * np.pi) + logdet + maha)


def gmm_fit(points: np.ndarray, K: int, cfg: dict | None = None, seed: int = 0) -> GmmResult:
    """EM for a full-covariance Gaussian mixture, initialized from the
    k-means solution.  Covariances get ``ridge * I`` added every M-step;
    labels are MAP responsibilities."""
    points = np.asarray(points, dtype=float)
    n, d = points.shape
    if n <= K * d:
        raise ValueError(f"need n > K*d points for covariance estimation (n={n}, K*d={K * d})")
    cfg = cfg or {}
    max_iter = int(cfg.get("max_iter", 200))
    tol = float(cfg.get("tol", 1e-6))
    ridge = float(cfg.get("ridge", 1e-6))

    km = kmeans(points, K, cfg={"restarts": cfg.get("restarts", 10)}, seed=seed)
    means = km.centers.copy()
    covs = np.empty((K, d, d))
    mix = np.empty(K)
    for k in range(K):
        mask = km.labels.labels == k
        mix[k] = max(mask.mean(), 1e-6)
        diff = points[mask] - means[k]
        covs[k] = (diff.T @ diff) / max(mask.sum(), 1) + ridge * np.eye(d)
    mix /= mix.sum()

    rng = make_rng(seed, "gmm-reinit")
    loglik = -np.inf
    degenerate = False
    reinits = 0
    log_resp = None
    trace = []
    for _ in range(max_iter):
        # E-step
        log_prob = np.empty((n, K))
        for k in range(K):
            log_prob[:, k] = np.log(mix[k]) + _log_gauss(points, means[k], covs[k])
        norm = logsumexp(log_prob, axis=1)
        new_loglik = float(norm.sum())
        trace.append(new_loglik)
        log_resp = log_prob - norm[:, None]
        resp = np.exp(log_resp)
        # M-step
        nk = resp.sum(axis=0)
        collapsed = np.nonzero(nk / n < 1e-8)[0]
        if collapsed.size:
            trace.pop()  # reset rounds break EM monotonicity by design
            if reinits >= 3:
                degenerate = True
                break
            reinits += 1
            for k in collapsed:
                means[k] = points[rng.integers(n)]
                covs[k] = np.cov(points.T).reshape(d, d) + ridge * np.eye(d)
                mix[k] = 1.0 / K
            mix /= mix.sum()
            continue
        mix = nk / n
        for k in range(K):
            means[k] = resp[:, k] @ points / nk[k]
            diff = points - means[k]
            covs[k] = (resp[:, k] * diff.T) @ diff / nk[k] + ridge * np.eye(d)
        if new_loglik - loglik <= tol * abs(new_loglik) and np.isfinite(loglik):
            loglik = new_loglik
            break
        loglik = new_loglik

    labels = np.argmax(log_resp, axis=1)
    return GmmResult(
        labels=Labeling(labels),
        means=means,
        covariances=covs,
        mixing=mix,
        loglik=float(loglik),
        degenerate=degenerate,
        loglik_trace=tuple(trace),
    )


def _contingency(a: np.ndarray, b: np.ndarray, ka: int, kb: int) -> np.ndarray:
    table = np.zeros((ka, kb), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    return table


def ari(a: Labeling | np.ndarray, b: Labeling | np.ndarray) -> float:
    """Adjusted Rand index from the pair-counting contingency table."""
    a = a.labels if isinstance(a, Labeling) else np.asarray(a, dtype=np.int64)
    b = b.labels if isinstance(b, Labeling) else np.asarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError("labelings must have equal length")
    n = a.shape[0]
    table = _contingency(a, b, a.max() + 1, b.max() + 1)

    def comb2(x):
        return x * (x - 1) / 2.0

    sum_ij = comb2(table).sum()
    sum_a = comb2(table.sum(axis=1)).sum()
    sum_b = comb2(table.sum(axis=0)).sum()
    total = comb2(n)
    expected = sum_a * sum_b / total
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        return 1.0  # both partitions trivial
    return float((sum_ij - expected) / (max_index - expected))


def misclustering_error(a, b, K: int) -> float:
    """Minimum mismatch fraction over all K! label permutations, via the
    Hungarian algorithm on the K x K contingency matrix."""
    a = a.labels if isinstance(a, Labeling) else np.asarray(a, dtype=np.int64)
    b = b.labels if isinstance(b, Labeling) else np.asarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError("labelings must have equal length")
    if a.max() >= K or b.max() >= K:
        raise ValueError("labels out of range for K")
    table = _contingency(a, b, K, K)
    rows, cols = linear_sum_assignment(-table)
    return float(1.0 - table[rows, cols].sum() / a.shape[0])


def aligned_confusion(truth, estimate, K: int) -> np.ndarray:
    """Row-normalized K x K confusion matrix after Hungarian-optimal
    column alignment.  Empty truth classes yield all-zero rows."""
    a = truth.labels if isinstance(truth, Labeling) else np.asarray(truth, dtype=np.int64)
    b = estimate.labels if isinstance(estimate, Labeling) else np.asarray(estimate, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError("labelings must have equal length")
    table = _contingency(a, b, K, K).astype(float)
    _, cols = linear_sum_assignment(-table)
    aligned = table[:, cols]
    sums = aligned.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(sums > 0, aligned / sums, 0.0)
    return out
