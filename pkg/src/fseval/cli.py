"""Command-line surface: validate, synth, eval, sweep, losses.

Exit codes: 0 success, 1 validation failure (validate subcommand),
2 data error, 3 config error, 4 numeric error. All randomness flows from
--seed; an optional TOML config file may set the same keys, with flags
taking precedence.
"""

from __future__ import annotations

import argparse
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # python 3.10
    import tomli as tomllib

from . import bench, losses, store
from .errors import ConfigError, DataError, EngineError, NumericError
from .features import FUSION_MODES, fuse_set
from .opta import COST_METRICS, SinkhornConfig
from .sampler import EpisodeSpec

DEFAULTS = {
    "method": "proto",
    "n": 5,
    "k": 1,
    "q": 15,
    "episodes": 2000,
    "seed": 0,
    "eps": 0.1,
    "sinkhorn_iters": 1000,
    "sinkhorn_tol": 1e-8,
    "passes": 1,
    "cost_metric": "sq-euclidean-normalized",
    "fusion": "concat",
    "threads": os.cpu_count() or 1,
    "rho": 1.0,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fseval",
        description="Few-shot evaluation engine over precomputed embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="check an embedding file")
    p_val.add_argument("path", help="FSE1 or CSV embedding file")

    p_synth = sub.add_parser("synth", help="generate a synthetic FSE1 file")
    p_synth.add_argument("--classes", type=int, default=20)
    p_synth.add_argument("--per-class", type=int, default=100)
    p_synth.add_argument("--dim", type=int, default=32)
    p_synth.add_argument("--radius", type=float, default=4.0)
    p_synth.add_argument("--sigma", type=float, default=1.2)
    p_synth.add_argument("--seed", type=int, default=None,
                         help=f"RNG seed (default {DEFAULTS['seed']})")
    p_synth.add_argument("--out", required=True, help="output FSE1 path")

    for name in ("eval", "sweep"):
        p = sub.add_parser(
            name,
            help="run an episodic evaluation" if name == "eval"
            else "run a K/Q grid of evaluations",
        )
        p.add_argument("--data", required=True, help="FSE1 or CSV embedding file")
        p.add_argument("--config", default=None, help="optional TOML config file")
        p.add_argument("--method", choices=bench.METHODS, default=None,
                       help=f"classifier (default {DEFAULTS['method']})")
        p.add_argument("--n", type=int, default=None,
                       help=f"ways per episode (default {DEFAULTS['n']})")
        if name == "eval":
            p.add_argument("--k", type=int, default=None,
                           help=f"support shots (default {DEFAULTS['k']})")
            p.add_argument("--q", type=int, default=None,
                           help=f"query shots (default {DEFAULTS['q']})")
        else:
            p.add_argument("--k-list", default="1,2,3,4,5",
                           help="comma-separated K values (default 1,2,3,4,5)")
            p.add_argument("--q-list", default="15",
                           help="comma-separated Q values (default 15)")
        p.add_argument("--episodes", type=int, default=None,
                       help=f"episode count (default {DEFAULTS['episodes']})")
        p.add_argument("--seed", type=int, default=None,
                       help=f"base RNG seed (default {DEFAULTS['seed']})")
        p.add_argument("--eps", type=float, default=None,
                       help=f"entropic regularization (default {DEFAULTS['eps']})")
        p.add_argument("--sinkhorn-iters", type=int, default=None,
                       help=f"max Sinkhorn iterations (default "
                            f"{DEFAULTS['sinkhorn_iters']})")
        p.add_argument("--sinkhorn-tol", type=float, default=None,
                       help=f"marginal violation tolerance (default "
                            f"{DEFAULTS['sinkhorn_tol']})")
        p.add_argument("--passes", type=int, default=None,
                       help=f"alignment passes (default {DEFAULTS['passes']})")
        p.add_argument("--cost-metric", choices=COST_METRICS, default=None,
                       help=f"default {DEFAULTS['cost_metric']}")
        p.add_argument("--fusion", choices=FUSION_MODES, default=None,
                       help=f"token fusion mode (default {DEFAULTS['fusion']})")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: machine parallelism)")
        p.add_argument("--out", default=None,
                       help="report JSON / sweep CSV output path")
        if name == "eval":
            p.add_argument("--no-per-episode", action="store_true",
                           help="omit per-episode accuracies from the report")

    p_loss = sub.add_parser("losses", help="evaluate loss kernels on a fixture")
    p_loss.add_argument("--fixtures", required=True, help="fixture JSON file")
    p_loss.add_argument("--normalize-patch", action="store_true",
                        help="divide the patch loss by the masked-patch count")
    return parser


def _merged(args, key):
    """Flag value if given, else config-file value, else documented default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        with open(cfg_path, "rb") as fh:
            doc = tomllib.load(fh)
        if key in doc:
            return doc[key]
    return DEFAULTS[key]


def _load_data(path: str, fusion: str) -> store.EmbeddingSet:
    es = store.load_csv(path) if str(path).endswith(".csv") else store.load(path)
    if isinstance(es, store.TokenEmbeddingSet):
        es = fuse_set(es, fusion)
    return es


def _progress(done: int) -> None:
    print(f"{done} episodes done", file=sys.stderr)


def cmd_validate(args) -> int:
    try:
        if str(args.path).endswith(".csv"):
            es = store.load_csv(args.path)
        else:
            es = store.load(args.path)
    except EngineError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    kind = "tokens" if isinstance(es, store.TokenEmbeddingSet) else "fused"
    print(f"{kind} n={es.n} d={es.d} c={es.c}")
    counts = " ".join(str(len(idx)) for idx in es.class_index)
    print(f"per-class counts: {counts}")
    if kind == "tokens":
        attn = es.attn_weights
        print(f"p={es.p} attn min={attn.min():.6g} max={attn.max():.6g} "
              f"mean={attn.mean():.6g}")
    print("NaN scan: clean")
    return 0


def cmd_synth(args) -> int:
    seed = args.seed if args.seed is not None else DEFAULTS["seed"]
    spec = bench.SynthSpec(
        classes=args.classes,
        per_class=args.per_class,
        dim=args.dim,
        mean_radius=args.radius,
        noise_sigma=args.sigma,
        seed=seed,
    )
    es = bench.generate_synthetic(spec)
    store.save(es, args.out)
    print(f"wrote {args.out}: n={es.n} d={es.d} c={es.c}")
    return 0


def _eval_inputs(args):
    fusion = _merged(args, "fusion")
    es = _load_data(args.data, fusion)
    cfg = SinkhornConfig(
        epsilon=_merged(args, "eps"),
        max_iters=_merged(args, "sinkhorn_iters"),
        tol=_merged(args, "sinkhorn_tol"),
        passes=_merged(args, "passes"),
    )
    return es, cfg, fusion


def cmd_eval(args) -> int:
    es, cfg, fusion = _eval_inputs(args)
    spec = EpisodeSpec(
        n_way=_merged(args, "n"),
        k_shot=_merged(args, "k"),
        q_query=_merged(args, "q"),
    )
    report = bench.run_eval(
        es,
        spec,
        _merged(args, "method"),
        cfg,
        _merged(args, "episodes"),
        _merged(args, "seed"),
        metric=_merged(args, "cost_metric"),
        threads=_merged(args, "threads"),
        fusion=fusion,
        keep_per_episode=not args.no_per_episode,
        progress=_progress,
    )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_canonical_json())
    print(
        f"{report.method} {spec.n_way}-way {spec.k_shot}-shot: "
        f"{report.mean_acc:.4f} ± {report.ci95:.4f}"
    )
    print(f"wall time: {report.wall_time:.2f}s", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    es, cfg, _ = _eval_inputs(args)
    try:
        k_list = [int(v) for v in args.k_list.split(",")]
        q_list = [int(v) for v in args.q_list.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad grid list: {exc}") from exc
    reports = bench.sweep(
        es,
        _merged(args, "n"),
        k_list,
        q_list,
        _merged(args, "method"),
        cfg,
        _merged(args, "episodes"),
        _merged(args, "seed"),
        metric=_merged(args, "cost_metric"),
        threads=_merged(args, "threads"),
    )
    csv_text = bench.sweep_csv(reports)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    for rep in reports:
        print(
            f"{rep.method} {rep.spec.n_way}-way {rep.spec.k_shot}-shot "
            f"{rep.spec.q_query}-query: {rep.mean_acc:.4f} ± {rep.ci95:.4f}",
            file=sys.stderr,
        )
    return 0


def cmd_losses(args) -> int:
    fix = losses.DistillationFixture.from_json(args.fixtures)
    print(f"loss_cls {losses.loss_cls(fix):.12g}")
    print(f"loss_patch {losses.loss_patch(fix, normalize=args.normalize_patch):.12g}")
    print(f"loss_mse {losses.loss_mse(fix):.12g}")
    return 0


_COMMANDS = {
    "validate": cmd_validate,
    "synth": cmd_synth,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "losses": cmd_losses,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DataError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
