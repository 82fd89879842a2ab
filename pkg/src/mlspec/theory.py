"""Closed-form and Monte-Carlo oracles from the asymptotic analysis:
the SNR tau, the optimal aggregation weight, the limiting mis-clustering
error, the eigenratio limit, and the limiting embedding centers.

tau(w) = n * [sum_l w_l (p_l - q_l)]^2
         / sum_l w_l^2 [p_l(1-p_l) + (K-1) q_l(1-q_l)]

Detection succeeds only above the threshold tau > K; below it the
procedure behaves like random guessing (error 1 - 1/K).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from ._rng import make_rng
from .aggregate import WeightVector
from .models import MppmParams

__all__ = [
    "SnrValue",
    "CenterSet",
    "tau",
    "optimal_weight",
    "asymptotic_error",
    "eigenratio_limit",
    "nu_basis",
    "embedding_centers",
]


@dataclass(frozen=True)
class SnrValue:
    """The signal-to-noise ratio tau for a given weight (or its limit)."""

    tau: float

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")


@dataclass(frozen=True)
class CenterSet:
    """Limiting embedding centers: K rows in K dimensions, first
    coordinate 1, remaining block sqrt(K(tau-K)/tau) * nu_k; the shared
    covariance is theta_scale on the trailing K-1 coordinates."""

    mu: np.ndarray
    theta_scale: float


def _layer_variances(params: MppmParams) -> np.ndarray:
    p, q, K = params.p, params.q, params.K
    return p * (1 - p) + (K - 1) * q * (1 - q)


def tau(params: MppmParams, w) -> SnrValue:
    """Finite-n SNR of the two-step procedure at weight ``w``."""
    weights = w.w if isinstance(w, WeightVector) else np.atleast_1d(np.asarray(w, dtype=float))
    if weights.shape[0] != params.L:
        raise ValueError("weight length must equal L")
    den = float((weights**2) @ _layer_variances(params))
    if den == 0.0:
        raise ValueError("all-zero denominator: weights or variances vanish")
    num = params.n * float(weights @ (params.p - params.q)) ** 2
    return SnrValue(tau=num / den)


def optimal_weight(params: MppmParams) -> WeightVector:
    """Unique tau-maximizing weight:
    w_l proportional to (p_l - q_l) / [p_l(1-p_l) + (K-1) q_l(1-q_l)].

    If every informative layer is assortative the result is on the
    simplex; with dis-assortative layers present, signed weights
    normalized by sum(|w|) are returned.
    """
    raw = (params.p - params.q) / np.maximum(_layer_variances(params), 1e-12)
    if np.all(raw == 0.0):
        raise ValueError("all layers uninformative (p = q everywhere)")
    if np.all(raw >= 0.0):
        return WeightVector(w=raw / raw.sum(), mode="simplex")
    return WeightVector(w=raw / np.abs(raw).sum(), mode="signed")


def asymptotic_error(tau_value: float, K: int, mc: dict | None = None) -> float:
    """Limiting mis-clustering error at SNR ``tau_value``.

    Above the threshold the error is 1 - P(a_i >= 0 for all i) with
    a ~ N(sqrt(tau - K) * 1, I_{K-1} + J_{K-1}).  K = 2 reduces to the
    closed form Phi(-sqrt((tau - 2) / 2)); K >= 3 uses a Monte-Carlo
    orthant probability.  At or below the threshold the random-guess
    level 1 - 1/K is returned.
    """
    t = tau_value.tau if isinstance(tau_value, SnrValue) else float(tau_value)
    if K < 2:
        raise ValueError("need K >= 2")
    if t <= K:
        return 1.0 - 1.0 / K
    if K == 2:
        # a ~ N(sqrt(t-2), 2); P(a >= 0) = Phi(sqrt((t-2)/2))
        return float(norm.cdf(-np.sqrt((t - 2.0) / 2.0)))
    mc = mc or {}
    samples = int(mc.get("samples", 10**6))
    if samples < 10**4:
        raise ValueError("insufficient MC precision: need samples >= 10^4")
    rng = make_rng(int(mc.get("seed", 0)), "orthant", K)
    d = K - 1
    cov = np.eye(d) + np.ones((d, d))
    chol = np.linalg.cholesky(cov)
    mean = np.sqrt(t - K)
    hits = 0
    chunk = 10**5
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        z = rng.standard_normal((m, d)) @ chol.T + mean
        hits += int(np.all(z >= 0.0, axis=1).sum())
        done += m
    return 1.0 - hits / samples


def eigenratio_limit(tau_value: float, K: int) -> float:
    """Limit of |lambda_K| / |lambda_{K+1}|:
    (sqrt(tau/K) + sqrt(K/tau)) / 2 above the threshold, 1 below."""
    t = tau_value.tau if isinstance(tau_value, SnrValue) else float(tau_value)
    if t < 0:
        raise ValueError("tau must be nonnegative")
    if t <= K:
        return 1.0
    return 0.5 * (np.sqrt(t / K) + np.sqrt(K / t))


def nu_basis(K: int) -> np.ndarray:
    """Deterministic K x (K-1) matrix V such that [1_K/sqrt(K), V] is
    orthogonal, built from the Householder reflection mapping e_1 to
    1_K/sqrt(K) and dropping the first column."""
    if K < 2:
        raise ValueError("need K >= 2")
    target = np.full(K, 1.0 / np.sqrt(K))
    u = target - np.eye(K)[0]
    nrm = np.linalg.norm(u)
    if nrm < 1e-15:
        return np.eye(K)[:, 1:]
    u /= nrm
    house = np.eye(K) - 2.0 * np.outer(u, u)  # columns: orthogonal completion
    return house[:, 1:]


def embedding_centers(K: int, tau_value: float) -> CenterSet:
    """Population centers of the scaled spectral embedding: row k is
    (1, sqrt(K(tau-K)/tau) * nu_k); covariance scale K/tau on the
    trailing coordinates."""
    t = tau_value.tau if isinstance(tau_value, SnrValue) else float(tau_value)
    if t <= K:
        raise ValueError("below threshold (tau <= K): centers undefined")
    scale = np.sqrt(K * (t - K) / t)
    mu = np.hstack([np.ones((K, 1)), scale * nu_basis(K)])
    return CenterSet(mu=mu, theta_scale=K / t)
