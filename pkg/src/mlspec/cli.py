"""Command-line interface.

Subcommands: ``generate`` (sample a network to files), ``detect`` (run a
detection method on a manifest), ``sweep`` (run a benchmark case spec to
CSV), ``theory`` (closed-form oracles), ``eval`` (score two label files).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import harness, theory
from .models import MppmParams


def _comma_floats(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split(",")])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlspec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample a multi-layer network to files")
    gen.add_argument("--model", choices=["mppm", "msbm"], default="mppm")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--k", type=int, required=True)
    gen.add_argument("--p", type=_comma_floats, help="within probabilities, one per layer")
    gen.add_argument("--q", type=_comma_floats, help="between probabilities, one per layer")
    gen.add_argument("--omega", help="semicolon-separated rows of comma floats, '|' between layers")
    gen.add_argument("--pi", type=_comma_floats, default=None)
    gen.add_argument("--balanced", action="store_true", help="exact-balanced labels")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output directory")

    det = sub.add_parser("detect", help="run community detection on a manifest")
    det.add_argument("manifest")
    det.add_argument("--method", required=True,
                     help="isc | scme | mean | speck | allegiance | fixed:<w1,..,wL>")
    det.add_argument("--cluster", choices=["kmeans", "gmm"], default="kmeans")
    det.add_argument("--k", type=int, required=True)
    det.add_argument("--seed", type=int, default=0)
    det.add_argument("--out", help="labels output file (default: stdout summary only)")

    swp = sub.add_parser("sweep", help="run an experiment spec to CSV")
    swp.add_argument("spec")
    swp.add_argument("--out", help="CSV output path (default stdout)")
    swp.add_argument("--repetitions", type=int, help="override the spec's repetition count")

    thr = sub.add_parser("theory", help="closed-form oracles")
    thr.add_argument("--tau", action="store_true")
    thr.add_argument("--optimal-weight", action="store_true")
    thr.add_argument("--asymptotic-error", action="store_true")
    thr.add_argument("--eigenratio-limit", action="store_true")
    thr.add_argument("--n", type=int)
    thr.add_argument("--k", type=int)
    thr.add_argument("--p", type=_comma_floats)
    thr.add_argument("--q", type=_comma_floats)
    thr.add_argument("--pi", type=_comma_floats, default=None)
    thr.add_argument("--w", type=_comma_floats)
    thr.add_argument("--tau-value", type=float)
    thr.add_argument("--mc-samples", type=int, default=10**6)
    thr.add_argument("--seed", type=int, default=0)

    ev = sub.add_parser("eval", help="score an estimated labeling against truth")
    ev.add_argument("truth")
    ev.add_argument("estimate")
    ev.add_argument("--k", type=int, required=True)

    return parser


def _mppm_from_args(args) -> MppmParams:
    if args.p is None or args.q is None or args.n is None or args.k is None:
        raise SystemExit("theory: need --n, --k, --p and --q")
    pi = args.pi if args.pi is not None else np.full(args.k, 1.0 / args.k)
    return MppmParams(n=args.n, K=args.k, p=args.p, q=args.q, pi=pi)


def _cmd_generate(args) -> int:
    from .models import mppm_to_msbm, sample_labels, sample_msbm, MsbmParams

    pi = args.pi if args.pi is not None else np.full(args.k, 1.0 / args.k)
    if args.model == "mppm":
        if args.p is None or args.q is None:
            raise SystemExit("generate: mppm needs --p and --q")
        params = mppm_to_msbm(MppmParams(n=args.n, K=args.k, p=args.p, q=args.q, pi=pi))
    else:
        if not args.omega:
            raise SystemExit("generate: msbm needs --omega")
        layers = [
            np.array([[float(x) for x in row.split(",")] for row in layer.split(";")])
            for layer in args.omega.split("|")
        ]
        params = MsbmParams(n=args.n, K=args.k, omega=np.stack(layers), pi=pi)
    mode = "exact-balanced" if args.balanced else "multinomial"
    labels = sample_labels(args.n, pi, mode=mode, seed=args.seed)
    net = sample_msbm(params, labels, seed=args.seed)
    manifest = harness.write_network(net, args.out, labels=labels)
    print(manifest)
    return 0


def _cmd_detect(args) -> int:
    net, _ = harness.load_network(args.manifest)
    kind, cluster, fixed = harness.parse_method(args.method, args.cluster)
    labels, weights = harness.run_method(kind, net, args.k, cluster, args.seed, fixed_w=fixed)
    if args.out:
        harness.write_labels(labels, args.out)
    if weights is not None:
        print("weights:", ",".join(f"{v:.6g}" for v in weights))
    else:
        print("weights: n/a")
    if not args.out:
        print("labels:", " ".join(str(v) for v in labels.labels))
    return 0


def _cmd_sweep(args) -> int:
    spec = harness.ExperimentSpec.from_json(args.spec)
    if args.repetitions:
        spec.repetitions = args.repetitions
    rows = harness.run_case(spec)
    text = harness.rows_to_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_theory(args) -> int:
    if args.tau:
        params = _mppm_from_args(args)
        if args.w is None:
            raise SystemExit("theory --tau: need --w")
        print(f"{theory.tau(params, args.w).tau:.6g}")
    elif args.optimal_weight:
        params = _mppm_from_args(args)
        w = theory.optimal_weight(params)
        print(",".join(f"{v:.6g}" for v in w.w))
    elif args.asymptotic_error:
        if args.tau_value is None or args.k is None:
            raise SystemExit("theory --asymptotic-error: need --tau-value and --k")
        err = theory.asymptotic_error(
            args.tau_value, args.k, mc={"samples": args.mc_samples, "seed": args.seed}
        )
        print(f"{err:.6g}")
    elif args.eigenratio_limit:
        if args.tau_value is None or args.k is None:
            raise SystemExit("theory --eigenratio-limit: need --tau-value and --k")
        print(f"{theory.eigenratio_limit(args.tau_value, args.k):.6g}")
    else:
        raise SystemExit("theory: choose one of --tau, --optimal-weight, "
                         "--asymptotic-error, --eigenratio-limit")
    return 0


def _cmd_eval(args) -> int:
    from .clustering import ari, misclustering_error

    truth = harness.load_labels(args.truth)
    estimate = harness.load_labels(args.estimate)
    print(f"ari: {ari(truth, estimate):.6g}")
    print(f"error: {misclustering_error(truth, estimate, args.k):.6g}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    handlers = {
        "generate": _cmd_generate,
        "detect": _cmd_detect,
        "sweep": _cmd_sweep,
        "theory": _cmd_theory,
        "eval": _cmd_eval,
    }
    try:
        return handlers[args.command](args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 2
        return exc.code or 0
    except Exception as exc:
        print(f"mlspec: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
