"""Weight selection by maximizing the squared eigenratio
g(w) = (lambda_K / lambda_{K+1})^2 of the weighted aggregate, via
projected gradient descent with a coordinate-descent fallback at
non-simple eigenvalues and multiple random starts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._rng import make_rng
from .aggregate import WeightVector, project_simplex, weighted_adjacency
from .models import Labeling, MultiLayerNetwork
from .spectral import DegenerateSpectrumError, eig_sym

__all__ = ["ScmeConfig", "ScmeResult", "eval_g", "grad_g", "scme_step", "run_scme", "NonSimpleEigenvalueError"]


class NonSimpleEigenvalueError(RuntimeError):
    """lambda_K or lambda_{K+1} is not simple in magnitude; the gradient
    formula does not apply at this weight."""


@dataclass(frozen=True)
class ScmeConfig:
    gamma0: float = 0.1
    r: float = 0.1
    T: int = 100
    M: int = 5
    epsilon0: float = 1e-4
    simple_tol: float = 1e-8
    coord_grid: int = 21
    method: str = "kmeans"
    cluster_cfg: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.gamma0 <= 0 or self.r < 0 or self.T < 1 or self.M < 1:
            raise ValueError("require gamma0 > 0, r >= 0, T >= 1, M >= 1")


@dataclass(frozen=True)
class ScmeResult:
    weights: WeightVector
    labels: Labeling
    best_g: float
    degenerate: bool = False


def _leading_system(net: MultiLayerNetwork, w: np.ndarray, K: int):
    a = weighted_adjacency(net, w)
    # K+2 pairs so that simplicity of lambda_{K+1} against its lower
    # neighbor can be checked
    k = min(K + 2, net.n)
    return np.linalg.norm(a), eig_sym(a, k)


def _g_from_system(anorm: float, system, K: int) -> float:
    lam_k = abs(system.values[K - 1])
    lam_k1 = abs(system.values[K])
    if lam_k1 < 1e-14 * (1.0 + anorm):
        raise DegenerateSpectrumError("degenerate tail eigenvalue |lambda_{K+1}| ~ 0")
    return float((lam_k / lam_k1) ** 2)


def eval_g(net: MultiLayerNetwork, w, K: int) -> float:
    """Squared eigenratio (lambda_K / lambda_{K+1})^2 at weight ``w``."""
    weights = w.w if isinstance(w, WeightVector) else np.atleast_1d(np.asarray(w, dtype=float))
    anorm, system = _leading_system(net, weights, K)
    return _g_from_system(anorm, system, K)


def _check_simple(values: np.ndarray, K: int, tol: float) -> bool:
    """Relative magnitude gaps of lambda_K and lambda_{K+1} against their
    spectral neighbors must exceed ``tol``."""
    mags = np.abs(values)
    scale = max(mags[0], 1e-300)
    for i in (K - 1, K):
        for j in (i - 1, i + 1):
            if 0 <= j < mags.shape[0] and abs(mags[i] - mags[j]) / scale <= tol:
                return False
    return True


def grad_g(net: MultiLayerNetwork, w, K: int, simple_tol: float = 1e-8, system=None) -> np.ndarray:
    """Gradient of g at ``w``:
    dg/dw_l = 2 lam_K lam_{K+1}^{-3} (lam_{K+1} u_K' A^(l) u_K
                                      - lam_K u_{K+1}' A^(l) u_{K+1}).

    Raises :class:`NonSimpleEigenvalueError` when the two pivotal
    eigenvalues are not simple in magnitude.
    """
    weights = w.w if isinstance(w, WeightVector) else np.atleast_1d(np.asarray(w, dtype=float))
    if system is None:
        _, system = _leading_system(net, weights, K)
    if not _check_simple(system.values, K, simple_tol):
        raise NonSimpleEigenvalueError("lambda_K or lambda_{K+1} not simple in magnitude")
    lam_k = system.values[K - 1]
    lam_k1 = system.values[K]
    u_k = system.vectors[:, K - 1]
    u_k1 = system.vectors[:, K]
    grad = np.empty(net.L)
    for ell, layer in enumerate(net.layers):
        qk = u_k @ layer @ u_k
        qk1 = u_k1 @ layer @ u_k1
        grad[ell] = 2.0 * lam_k / lam_k1**3 * (lam_k1 * qk - lam_k * qk1)
    return grad


def _golden_section(f, lo: float, hi: float, iters: int = 30):
    """Golden-section maximization of f on [lo, hi]."""
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    x = c if fc >= fd else d
    return x, max(fc, fd)


def _coordinate_step(net, w: np.ndarray, K: int, coord: int, cfg: ScmeConfig) -> np.ndarray:
    """Line search over w(t) = (1-t) w + t e_coord, t in [0, 1): uniform
    grid then golden-section refinement, accepted only on improvement."""
    e = np.zeros(net.L)
    e[coord] = 1.0

    def g_at(t: float) -> float:
        try:
            return eval_g(net, (1.0 - t) * w + t * e, K)
        except DegenerateSpectrumError:
            return -np.inf

    grid = np.linspace(0.0, 1.0, cfg.coord_grid, endpoint=False)
    values = np.array([g_at(t) for t in grid])
    if not np.isfinite(values).any():
        raise DegenerateSpectrumError("objective degenerate along the whole search line")
    i = int(np.argmax(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[i + 1] if i + 1 < grid.size else 1.0 - 1e-12
    t_star, g_star = _golden_section(g_at, lo, hi)
    if g_star < values[i]:
        t_star, g_star = grid[i], values[i]
    if g_star <= values[0] or t_star <= 0.0:
        return w  # no improvement over staying put
    return project_simplex((1.0 - t_star) * w + t_star * e).w


def scme_step(net: MultiLayerNetwork, w_t, K: int, t: int, cfg: ScmeConfig | None = None, system=None) -> np.ndarray:
    """One update: projected gradient ascent with step gamma0 / (1 + r t)
    when lambda_K, lambda_{K+1} are simple, otherwise one coordinate-
    descent pass on the cyclically chosen coordinate t mod L."""
    cfg = cfg or ScmeConfig()
    w = w_t.w if isinstance(w_t, WeightVector) else np.atleast_1d(np.asarray(w_t, dtype=float))
    try:
        grad = grad_g(net, w, K, simple_tol=cfg.simple_tol, system=system)
    except NonSimpleEigenvalueError:
        return _coordinate_step(net, w, K, t % net.L, cfg)
    gamma = cfg.gamma0 / (1.0 + cfg.r * t)
    return project_simplex(w + gamma * grad).w


def run_scme(net: MultiLayerNetwork, K: int, cfg: ScmeConfig | None = None, seed: int = 0) -> ScmeResult:
    """Multi-start eigenratio maximization.

    Each of the M starts draws its weight uniformly from the simplex
    (Dirichlet(1, ..., 1)) and iterates :func:`scme_step` until the
    weight change is below ``epsilon0`` or T iterations; the best-g
    iterate within each start is tracked (decaying-step updates are not
    monotone).  The global best across starts is returned, together with
    spectral-clustering labels at that weight.
    """
    cfg = cfg or ScmeConfig()
    if K + 1 > net.n:
        raise ValueError("need K + 1 <= n")

    if net.L == 1:
        w = np.array([1.0])
        labels = _cluster_at(net, w, K, cfg, seed)
        try:
            best_g = eval_g(net, w, K)
        except DegenerateSpectrumError:
            best_g = np.nan
        return ScmeResult(weights=WeightVector(w=w), labels=labels, best_g=best_g)

    best_w = None
    best_g = -np.inf
    degenerate_starts = 0
    for m in range(cfg.M):
        rng = make_rng(seed, "scme-start", m)
        w = rng.dirichlet(np.ones(net.L))
        try:
            anorm, system = _leading_system(net, w, K)
            g_best_m, w_best_m = _g_from_system(anorm, system, K), w.copy()
        except DegenerateSpectrumError:
            degenerate_starts += 1
            continue
        for t in range(cfg.T):
            try:
                w_next = scme_step(net, w, K, t, cfg, system=system)
                anorm, system = _leading_system(net, w_next, K)
                g_next = _g_from_system(anorm, system, K)
            except DegenerateSpectrumError:
                break
            if g_next > g_best_m:
                g_best_m, w_best_m = g_next, w_next.copy()
            delta = np.linalg.norm(w_next - w)
            w = w_next
            if delta <= cfg.epsilon0:
                break
        if g_best_m > best_g:
            best_g, best_w = g_best_m, w_best_m

    if best_w is None:
        # every start degenerate: fall back to equal weights
        best_w = np.full(net.L, 1.0 / net.L)
        labels = _cluster_at(net, best_w, K, cfg, seed)
        return ScmeResult(
            weights=WeightVector(w=best_w), labels=labels, best_g=np.nan, degenerate=True
        )

    labels = _cluster_at(net, best_w, K, cfg, seed)
    return ScmeResult(weights=WeightVector(w=best_w), labels=labels, best_g=float(best_g))


def _cluster_at(net, w: np.ndarray, K: int, cfg: ScmeConfig, seed: int) -> Labeling:
    from .aggregate import two_step

    return two_step(net, WeightVector(w=w), K, method=cfg.method, cfg=cfg.cluster_cfg, seed=seed)
