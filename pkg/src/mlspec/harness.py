"""Experiment harness: network file IO, the benchmark-case runner, and
CSV emission.

File formats
------------
manifest: JSON ``{"n": int, "layers": [paths], "labels": optional path}``.
layer files: dense (n lines of n whitespace/comma separated reals) or an
edge list (lines ``i j`` or ``i j weight``, 0-indexed, symmetrized on
load, duplicate edges summed).
labels: one 0-indexed integer per line.
results: CSV with the fixed header ``case,sweep,method,seed,ari,error,weights,seconds``.
"""

from __future__ import annotations

import copy
import json
import math
import os
import re
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._rng import subseed
from .aggregate import WeightVector, two_step
from .baselines import GridSpec, grid_search_oracle, mean_adjacency, module_allegiance, speck
from .clustering import ari, misclustering_error
from .isc import IscConfig, run_isc
from .models import Labeling, MppmParams, MsbmParams, MultiLayerNetwork, mppm_to_msbm, sample_labels, sample_msbm
from .scme import ScmeConfig, run_scme

__all__ = [
    "ExperimentSpec",
    "ResultRow",
    "RESULT_HEADER",
    "load_network",
    "write_network",
    "write_labels",
    "load_labels",
    "run_case",
    "rows_to_csv",
]

RESULT_HEADER = "case,sweep,method,seed,ari,error,weights,seconds"


@dataclass
class ResultRow:
    case: str
    sweep: float
    method: str
    seed: int
    ari: float
    error: float
    weights: str
    seconds: float

    def to_csv(self) -> str:
        def num(x):
            return "nan" if (isinstance(x, float) and math.isnan(x)) else repr(float(x))

        return ",".join(
            [
                self.case,
                num(self.sweep),
                self.method,
                str(self.seed),
                num(self.ari),
                num(self.error),
                f'"{self.weights}"' if "," in self.weights else self.weights,
                num(self.seconds),
            ]
        )


# ---------------------------------------------------------------------------
# network files


def _load_layer_file(path: Path, n: int) -> np.ndarray:
    """Dense matrix or edge-list text, auto-detected by line shape."""
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty layer file")
    first = lines[0].replace(",", " ").split()
    if len(lines) == n and len(first) == n:
        rows = [
            np.fromiter((float(t) for t in ln.replace(",", " ").split()), dtype=float)
            for ln in lines
        ]
        a = np.vstack(rows)
        if a.shape != (n, n):
            raise ValueError(f"{path}: dense matrix shape {a.shape} != ({n}, {n})")
        if np.max(np.abs(a - a.T)) > 1e-9:
            raise ValueError(f"{path}: dense matrix asymmetric beyond 1e-9")
        a = 0.5 * (a + a.T)
        return a
    # edge list
    a = np.zeros((n, n))
    for ln in lines:
        parts = ln.replace(",", " ").split()
        if len(parts) not in (2, 3):
            raise ValueError(f"{path}: malformed edge line {ln!r}")
        i, j = int(parts[0]), int(parts[1])
        wgt = float(parts[2]) if len(parts) == 3 else 1.0
        if i >= n or j >= n or i < 0 or j < 0:
            raise ValueError(f"{path}: node index out of range in line {ln!r}")
        if a[i, j] != 0.0:
            warnings.warn(f"{path}: duplicate edge {i}-{j} summed")
        a[i, j] += wgt
        if i != j:
            a[j, i] += wgt
    return a


def load_network(manifest_path) -> tuple[MultiLayerNetwork, Labeling | None]:
    """Read a manifest and its layer (and optional label) files."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise FileNotFoundError(str(manifest_path))
    manifest = json.loads(manifest_path.read_text())
    n = int(manifest["n"])
    base = manifest_path.parent
    layers = []
    for rel in manifest["layers"]:
        path = base / rel
        if not path.exists():
            raise FileNotFoundError(str(path))
        a = _load_layer_file(path, n)
        if np.any(np.diagonal(a) != 0.0):
            warnings.warn(f"{path}: nonzero diagonal forced to zero")
            np.fill_diagonal(a, 0.0)
        layers.append(a)
    labels = None
    if manifest.get("labels"):
        labels = load_labels(base / manifest["labels"])
    return MultiLayerNetwork(n=n, layers=layers), labels


def write_network(net: MultiLayerNetwork, out_dir, labels: Labeling | None = None) -> Path:
    """Write dense layer files (17 significant digits) plus a manifest;
    returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    layer_names = []
    for ell, a in enumerate(net.layers):
        name = f"layer_{ell:02d}.txt"
        np.savetxt(out / name, a, fmt="%.17g")
        layer_names.append(name)
    manifest = {"n": net.n, "layers": layer_names}
    if labels is not None:
        write_labels(labels, out / "labels.txt")
        manifest["labels"] = "labels.txt"
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def write_labels(labels: Labeling, path) -> None:
    Path(path).write_text("".join(f"{v}\n" for v in labels.labels))


def load_labels(path) -> Labeling:
    values = [int(ln) for ln in Path(path).read_text().split()]
    return Labeling(np.array(values, dtype=np.int64))


# ---------------------------------------------------------------------------
# experiment specs


@dataclass
class ExperimentSpec:
    """One benchmark case: generative parameters, optionally one swept
    parameter, methods to run, and repetition/seed bookkeeping.

    ``params`` holds the JSON-level generative description; see
    :func:`build_params` for the accepted keys.
    """

    case: str
    params: dict
    methods: list
    repetitions: int = 10
    seed: int = 0
    cluster: str = "kmeans"
    sweep_param: str | None = None
    sweep_values: list = field(default_factory=list)

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.sweep_param is not None and not self.sweep_values:
            raise ValueError("swept range must be non-empty")

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        data = json.loads(Path(path).read_text())
        sweep = data.pop("sweep", None)
        known = {"case", "methods", "repetitions", "seed", "cluster"}
        top = {k: data.pop(k) for k in list(data) if k in known}
        spec = cls(
            case=top.get("case", "case"),
            params=data,
            methods=top.get("methods", ["isc"]),
            repetitions=int(top.get("repetitions", 10)),
            seed=int(top.get("seed", 0)),
            cluster=top.get("cluster", "kmeans"),
            sweep_param=sweep["param"] if sweep else None,
            sweep_values=list(sweep["values"]) if sweep else [],
        )
        return spec


_INDEXED = re.compile(r"^(\w+)\[(\d+)\]$")


def _apply_sweep(params: dict, param: str, value) -> dict:
    """Set one (possibly indexed) parameter; pi entries keep sum 1 by
    adjusting the last other coordinate."""
    params = copy.deepcopy(params)
    m = _INDEXED.match(param)
    if m:
        key, idx = m.group(1), int(m.group(2))
        seq = list(params[key])
        seq[idx] = value
        if key == "pi":
            other = len(seq) - 1 if idx != len(seq) - 1 else 0
            seq[other] = 1.0 - (sum(seq) - seq[other])
        params[key] = seq
    else:
        params[param] = value
    return params


def build_params(params: dict):
    """Turn a JSON-level description into model parameters.

    Keys: ``n``, ``K``, ``model`` ("mppm" or "msbm"), ``pi`` (default
    balanced), ``balanced_labels`` (default true for balanced pi).
    MPPM: either direct ``p``/``q`` probability lists, or ``p_bar`` /
    ``q_bar`` / ``c_rho`` scaled by c_rho * log(n) / n.  MSBM: ``omega``
    (list of K x K matrices) or ``omega_bar`` with ``c_rho`` scaling.
    When ``L`` exceeds the listed length, the final entry is repeated.
    """
    n = int(params["n"])
    K = int(params["K"])
    model = params.get("model", "mppm")
    pi = params.get("pi")
    pi = np.full(K, 1.0 / K) if pi is None else np.asarray(pi, dtype=float)
    scale = float(params.get("c_rho", 1.0)) * math.log(n) / n

    def extend(seq, L):
        seq = list(seq)
        while len(seq) < L:
            seq.append(seq[-1])
        return seq[:L]

    if model == "mppm":
        if "p" in params:
            p, q = list(params["p"]), list(params["q"])
        else:
            p = [v * scale for v in params["p_bar"]]
            q = [v * scale for v in params["q_bar"]]
        L = int(params.get("L", len(p)))
        p, q = extend(p, L), extend(q, L)
        return MppmParams(n=n, K=K, p=np.array(p), q=np.array(q), pi=pi)
    if model == "msbm":
        if "omega" in params:
            omega = [np.asarray(o, dtype=float) for o in params["omega"]]
        else:
            omega = [np.asarray(o, dtype=float) * scale for o in params["omega_bar"]]
        L = int(params.get("L", len(omega)))
        while len(omega) < L:
            omega.append(omega[-1].copy())
        return MsbmParams(n=n, K=K, omega=np.stack(omega[:L]), pi=pi)
    raise ValueError(f"unknown model {model!r}")


def parse_method(name: str, default_cluster: str):
    """Resolve a method name like ``isc_gm`` or ``fixed:0.2,0.8`` into
    (kind, cluster method, fixed weights or None)."""
    cluster = default_cluster
    fixed = None
    base = name
    if name.startswith("fixed:"):
        base = "fixed"
        fixed = np.array([float(x) for x in name.split(":", 1)[1].split(",")])
    elif name.endswith("_km"):
        base, cluster = name[:-3], "kmeans"
    elif name.endswith("_gm"):
        base, cluster = name[:-3], "gmm"
    if base not in {"isc", "scme", "mean", "speck", "allegiance", "grid", "fixed"}:
        raise ValueError(f"unknown method {name!r}")
    return base, cluster, fixed


def run_method(kind: str, net: MultiLayerNetwork, K: int, cluster: str, seed: int,
               fixed_w=None, truth: Labeling | None = None):
    """Dispatch one detection method; returns (labels, weights-or-None)."""
    if kind == "isc":
        res = run_isc(net, K, IscConfig(method=cluster), seed=seed)
        return res.labels, res.weights.w
    if kind == "scme":
        res = run_scme(net, K, ScmeConfig(method=cluster), seed=seed)
        return res.labels, res.weights.w
    if kind == "mean":
        return mean_adjacency(net, K, method=cluster, seed=seed), np.full(net.L, 1.0 / net.L)
    if kind == "speck":
        return speck(net, K, method=cluster, seed=seed), None
    if kind == "allegiance":
        return module_allegiance(net, K, method=cluster, seed=seed), None
    if kind == "grid":
        if truth is None:
            raise ValueError("grid-search oracle needs truth labels")
        w, _ = grid_search_oracle(net, K, truth, GridSpec(), method=cluster, seed=seed)
        labels = two_step(net, w, K, method=cluster, seed=seed)
        return labels, w.w
    if kind == "fixed":
        w = WeightVector(w=np.asarray(fixed_w, dtype=float))
        return two_step(net, w, K, method=cluster, seed=seed), w.w
    raise ValueError(f"unknown method kind {kind!r}")


def _one_run(spec: ExperimentSpec, si: int, sweep_value, ri: int) -> list:
    params_dict = spec.params
    if spec.sweep_param is not None:
        params_dict = _apply_sweep(spec.params, spec.sweep_param, sweep_value)
    params = build_params(params_dict)
    K = params.K
    net_seed = subseed(spec.seed, si, ri)
    balanced = params_dict.get(
        "balanced_labels", bool(np.allclose(params.pi, params.pi[0]) and params.n % K == 0)
    )
    mode = "exact-balanced" if balanced else "multinomial"
    truth = sample_labels(params.n, params.pi, mode=mode, seed=net_seed)
    msbm = params if isinstance(params, MsbmParams) else mppm_to_msbm(params)
    net = sample_msbm(msbm, truth, seed=net_seed)

    rows = []
    for mi, name in enumerate(spec.methods):
        kind, cluster, fixed = parse_method(name, spec.cluster)
        run_seed = subseed(spec.seed, si, ri, mi)
        start = time.perf_counter()
        try:
            labels, weights = run_method(kind, net, K, cluster, run_seed, fixed_w=fixed, truth=truth)
            row = ResultRow(
                case=spec.case,
                sweep=float(sweep_value) if sweep_value is not None else float("nan"),
                method=name,
                seed=net_seed,
                ari=ari(truth, labels),
                error=misclustering_error(truth, labels, K),
                weights=";".join(f"{v:.6g}" for v in weights) if weights is not None else "",
                seconds=time.perf_counter() - start,
            )
        except Exception as exc:  # failures become rows, never abort the sweep
            row = ResultRow(
                case=spec.case,
                sweep=float(sweep_value) if sweep_value is not None else float("nan"),
                method=name,
                seed=net_seed,
                ari=float("nan"),
                error=float("nan"),
                weights=f"error: {exc}",
                seconds=time.perf_counter() - start,
            )
        rows.append(row)
    return rows


def run_case(spec: ExperimentSpec) -> list:
    """Run a full sweep x repetition x method grid; rows come back in
    deterministic (sweep, rep, method) order regardless of parallelism."""
    sweep_values = spec.sweep_values if spec.sweep_param is not None else [None]
    tasks = [(si, sv, ri) for si, sv in enumerate(sweep_values) for ri in range(spec.repetitions)]
    max_workers = int(os.environ.get("MLSPEC_THREADS", os.cpu_count() or 1))
    if max_workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            chunks = list(pool.map(lambda t: _one_run(spec, *t), tasks))
    else:
        chunks = [_one_run(spec, *t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def rows_to_csv(rows) -> str:
    return "\n".join([RESULT_HEADER] + [row.to_csv() for row in rows]) + "\n"
