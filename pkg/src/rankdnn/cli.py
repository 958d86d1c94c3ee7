"""Command-line interface: data synthesis, training, evaluation, plots.

Subcommands
    gen-data    write a synthetic feature set to an .fvec file
    fit-pca     fit a PCA model on a feature file and save it
    train       meta-train a ranking model (MLP or the linear SVM baseline)
    eval        evaluate a saved or freshly trained model episodically
    ablate      train and evaluate one model per encoding scheme
    cross-eval  meta-train on one feature file, evaluate on another
    plot        render training curves from a saved manifest to SVG

Configuration is a TOML file mirroring ExperimentConfig, with an optional
[data] table mirroring DataConfig.  Command-line flags override file values,
``--set key=value`` (dotted ``data.key`` for the data table) overrides any
remaining field, and the environment variable RANKDNN_SEED supplies the seed
when neither the flags nor the file set one.

Evaluation output is dual: one plain-text line per episode plus a summary
line, then the machine-readable report as a single JSON line (always last).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .benchmarks import BENCHMARK_NAMES, benchmark_by_name
from .encoding import EncodingScheme
from .errors import InvalidArgumentError, RankError
from .harness import (
    DataConfig,
    ExperimentConfig,
    Report,
    ablate,
    cross_domain_eval,
    evaluate,
    generate_data,
    load_ranker,
    meta_train,
    resolve_data,
    run_experiment,
    save_ranker,
    train_svm,
)
from .features import read_feature_set, write_feature_set
from .pca import fit_pca, save_pca

_SCHEME_CHOICES = [s.value.replace("_", "-") for s in EncodingScheme]
_ALL_SCHEMES = ",".join(_SCHEME_CHOICES)


def _env_seed() -> int | None:
    raw = os.environ.get("RANKDNN_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise InvalidArgumentError(f"RANKDNN_SEED must be an integer, got {raw!r}")


def _parse_literal(text: str):
    """Parse a flag value as a TOML literal; bare words fall back to strings."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def _apply_set_overrides(config_dict: dict, assignments) -> None:
    for assignment in assignments or ():
        if "=" not in assignment:
            raise InvalidArgumentError(f"--set needs key=value, got {assignment!r}")
        key, value = assignment.split("=", 1)
        key = key.strip()
        value = _parse_literal(value.strip())
        if key.startswith("data."):
            if config_dict.get("data") is None:
                config_dict["data"] = {}
            config_dict["data"][key[len("data."):]] = value
        else:
            config_dict[key] = value


def _config_from_args(args) -> ExperimentConfig:
    """Build the experiment config from --benchmark or --config plus overrides."""
    if getattr(args, "benchmark", None):
        config_dict = benchmark_by_name(args.benchmark, seed=args.seed).to_dict()
    elif getattr(args, "config", None):
        with open(args.config, "rb") as handle:
            config_dict = tomllib.load(handle)
    else:
        config_dict = {}

    if args.seed is not None:
        config_dict["seed"] = args.seed
    elif "seed" not in config_dict:
        env = _env_seed()
        if env is not None:
            config_dict["seed"] = env

    flag_fields = (
        ("encoder", "scheme"),
        ("episodes", "episodes"),
        ("queries", "n_queries"),
        ("iterations", "iterations"),
        ("anchors", "anchors"),
        ("svm_c", "svm_c"),
        ("clip", "clip_norm"),
        ("workers", "workers"),
    )
    for flag, field in flag_fields:
        value = getattr(args, flag, None)
        if value is not None:
            config_dict[field] = value
    if getattr(args, "l2", None) is not None:
        config_dict["l2_normalize"] = args.l2
    if getattr(args, "finetune", None) is not None:
        config_dict["finetune"] = args.finetune
    for flag, field in (("train_data", "train_path"), ("test_data", "test_path"),
                        ("val_data", "val_path")):
        value = getattr(args, flag, None)
        if value is not None:
            config_dict[field] = value

    _apply_set_overrides(config_dict, getattr(args, "set", None))

    # A data table without its own seed follows the experiment seed.
    data = config_dict.get("data")
    if isinstance(data, dict) and "seed" not in data and "seed" in config_dict:
        data["seed"] = config_dict["seed"]
    return ExperimentConfig.from_dict(config_dict)


def _emit_report(report: Report, args, label: str = "") -> None:
    prefix = f"{label} " if label else ""
    if not getattr(args, "quiet", False):
        for index, accuracy in enumerate(report.per_episode):
            print(f"{prefix}episode {index + 1:04d}  accuracy {accuracy:.6f}")
    print(
        f"{prefix}mean {report.mean_accuracy:.4f}  ci95 {report.ci95:.4f}  "
        f"episodes {report.episode_count}  sec/episode "
        f"{report.seconds_per_episode:.4f}  hash {report.config_hash}"
    )
    per_episode_out = getattr(args, "per_episode_out", None)
    if per_episode_out:
        with open(per_episode_out, "w") as handle:
            for accuracy in report.per_episode:
                handle.write(f"{accuracy:.12f}\n")
    payload = report.to_dict()
    if label:
        payload["label"] = label
    json_out = getattr(args, "json_out", None)
    if json_out:
        with open(json_out, "w") as handle:
            json.dump(payload, handle, indent=2)
    print(json.dumps(payload))


def cmd_gen_data(args) -> int:
    seed = args.seed
    if seed is None:
        seed = _env_seed()
    if seed is None:
        seed = 0
    data = DataConfig(
        kind=args.kind,
        num_classes=args.classes,
        per_class=args.per_class,
        dim=args.dim,
        center_scale=args.center_scale,
        noise_sigma=args.noise_sigma,
        flip_scale=args.flip_scale,
        flip_prob=args.flip_prob,
        radius_lo=args.radius_lo,
        radius_hi=args.radius_hi,
        active_coords=args.active_coords,
        seed=seed,
        # split bookkeeping is not used here; the file holds every class
        train_classes=1,
        val_classes=0,
        test_classes=0,
    )
    feature_set = generate_data(data)
    write_feature_set(feature_set, args.out)
    print(
        f"wrote {args.out}: {feature_set.count} vectors, dim {feature_set.dim}, "
        f"{len(feature_set.classes)} classes, kind {args.kind}, seed {seed}"
    )
    return 0


def cmd_fit_pca(args) -> int:
    feature_set = read_feature_set(args.train)
    model = fit_pca(feature_set.vectors, args.dim)
    save_pca(model, args.out)
    total = np.var(feature_set.vectors - feature_set.vectors.mean(axis=0),
                   axis=0).sum()
    kept = model.explained_variance.sum()
    share = kept / total if total > 0 else 1.0
    print(
        f"wrote {args.out}: {model.input_dim} -> {model.output_dim} dims, "
        f"variance kept {share:.4f}"
    )
    return 0


def cmd_train(args) -> int:
    config = _config_from_args(args)
    train_set, val_set, _ = resolve_data(config)
    if args.ranker == "svm":
        ranker = train_svm(config, data=(train_set, val_set))
    else:
        ranker = meta_train(config, data=(train_set, val_set))
    manifest = save_ranker(ranker, args.out)
    losses = [entry["loss"] for entry in ranker.history if "loss" in entry]
    tail = f", final-loss {np.mean(losses[-100:]):.4f}" if losses else ""
    print(
        f"trained {manifest['model_type']} ranker: scheme {manifest['scheme']}, "
        f"pca {config.pca_dim}{tail}"
    )
    print(f"wrote {args.out}.json (+ {manifest['model_file']}, "
          f"{manifest['pca_file']})")
    return 0


def cmd_eval(args) -> int:
    test_set = read_feature_set(args.test_data) if args.test_data else None
    if args.model:
        ranker = load_ranker(args.model)
        config = _merge_eval_overrides(ranker.config.to_dict(), args)
        report = evaluate(ranker, config, test_set=test_set)
    else:
        config = _config_from_args(args)
        if test_set is not None:
            ranker = meta_train(config)
            report = evaluate(ranker, config, test_set=test_set)
        else:
            _, report = run_experiment(config)
    _emit_report(report, args)
    return 0


def _merge_eval_overrides(config_dict: dict, args) -> ExperimentConfig:
    """Re-apply the eval flags on top of a saved ranker's stored config."""
    if args.seed is not None:
        config_dict["seed"] = args.seed
    for flag, field in (("episodes", "episodes"), ("queries", "n_queries"),
                        ("workers", "workers")):
        value = getattr(args, flag, None)
        if value is not None:
            config_dict[field] = value
    if args.finetune is not None:
        config_dict["finetune"] = args.finetune
    _apply_set_overrides(config_dict, args.set)
    return ExperimentConfig.from_dict(config_dict)


def cmd_ablate(args) -> int:
    config = _config_from_args(args)
    schemes = [name.strip() for name in args.schemes.split(",") if name.strip()]
    rows = ablate(config, schemes)
    payload = []
    for row in rows:
        name = row.scheme.value.replace("_", "-")
        if row.report is None:
            print(f"{name:22s} ERROR {row.error}")
            payload.append({"scheme": row.scheme.value, "error": row.error})
        else:
            print(
                f"{name:22s} mean {row.report.mean_accuracy:.4f}  "
                f"ci95 {row.report.ci95:.4f}"
            )
            entry = row.report.to_dict()
            entry["scheme"] = row.scheme.value
            payload.append(entry)
    print(json.dumps({"rows": payload}))
    return 0


def cmd_cross_eval(args) -> int:
    train_set = read_feature_set(args.train_data)
    test_set = read_feature_set(args.test_data)
    args.train_data = args.test_data = None  # the sets are passed directly
    config = _config_from_args(args)
    report = cross_domain_eval(train_set, test_set, config)
    _emit_report(report, args)
    return 0


def cmd_plot(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(f"{args.model}.json") as handle:
        manifest = json.load(handle)
    history = manifest.get("history", [])
    if not history:
        raise InvalidArgumentError(
            f"{args.model}.json has no training history to plot"
        )
    iterations = [entry["iteration"] for entry in history]
    losses = [entry["loss"] for entry in history]
    val_points = [(entry["iteration"], entry["val_accuracy"])
                  for entry in history if "val_accuracy" in entry]

    fig, loss_ax = plt.subplots(figsize=(8, 4.5))
    loss_ax.plot(iterations, losses, lw=0.8, color="tab:blue", label="BCE loss")
    loss_ax.set_xlabel("iteration")
    loss_ax.set_ylabel("training loss")
    if val_points:
        acc_ax = loss_ax.twinx()
        acc_ax.plot(*zip(*val_points), "o-", color="tab:orange", ms=3,
                    label="validation accuracy")
        acc_ax.set_ylabel("episode accuracy")
        acc_ax.set_ylim(0.0, 1.0)
    scheme = manifest.get("scheme", "?")
    loss_ax.set_title(
        f"scheme {scheme}  hash {manifest.get('config_hash', '?')}"
    )
    fig.tight_layout()
    fig.savefig(args.out)
    plt.close(fig)
    print(f"wrote {args.out}")
    return 0


def _add_config_source(parser: argparse.ArgumentParser, required: bool) -> None:
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--config", help="TOML experiment config")
    group.add_argument("--benchmark", choices=BENCHMARK_NAMES,
                       help="shipped fixed-seed benchmark")


def _add_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--encoder", choices=_SCHEME_CHOICES,
                        help="triplet encoding scheme")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--episodes", type=int, default=None)
    parser.add_argument("--queries", type=int, default=None,
                        help="queries per class per episode")
    parser.add_argument("--iterations", type=int, default=None)
    parser.add_argument("--anchors", choices=("support", "query", "both"),
                        default=None)
    parser.add_argument("--svm-c", dest="svm_c", type=float, default=None)
    parser.add_argument("--clip", type=float, default=None,
                        help="gradient-norm clip (off by default)")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--l2", dest="l2", action="store_true", default=None,
                        help="L2-normalize features after PCA")
    parser.add_argument("--no-l2", dest="l2", action="store_false")
    parser.add_argument("--finetune", dest="finetune", action="store_true",
                        default=None, help="fine-tune on each episode's support")
    parser.add_argument("--no-finetune", dest="finetune", action="store_false")
    parser.add_argument("--train-data", dest="train_data", default=None,
                        help=".fvec training features")
    parser.add_argument("--val-data", dest="val_data", default=None)
    parser.add_argument("--test-data", dest="test_data", default=None)
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override any config field (data.* for the data table)")


def _add_report_outputs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--quiet", action="store_true",
                        help="suppress per-episode lines")
    parser.add_argument("--per-episode-out", dest="per_episode_out",
                        help="write one accuracy per line to this file")
    parser.add_argument("--json-out", dest="json_out",
                        help="also write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankdnn",
        description="Few-shot classification by ranking over feature triplets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", help="write a synthetic .fvec feature file")
    gen.add_argument("--out", required=True)
    gen.add_argument("--kind", choices=("gaussian", "mirrored"),
                     default="gaussian")
    gen.add_argument("--classes", type=int, default=84)
    gen.add_argument("--per-class", dest="per_class", type=int, default=30)
    gen.add_argument("--dim", type=int, default=64)
    gen.add_argument("--center-scale", dest="center_scale", type=float,
                     default=5.0)
    gen.add_argument("--noise-sigma", dest="noise_sigma", type=float,
                     default=1.0)
    gen.add_argument("--flip-scale", dest="flip_scale", type=float, default=0.4,
                     help="mirrored kind: attenuated flip factor in (0,1)")
    gen.add_argument("--flip-prob", dest="flip_prob", type=float, default=0.5,
                     help="mirrored kind: probability a sample is mirrored")
    gen.add_argument("--radius-lo", dest="radius_lo", type=float, default=1.0)
    gen.add_argument("--radius-hi", dest="radius_hi", type=float, default=1.0)
    gen.add_argument("--active-coords", dest="active_coords", type=int,
                     default=0, help="mirrored kind: sparse center support")
    gen.add_argument("--seed", type=int, default=None)
    gen.set_defaults(func=cmd_gen_data)

    pca = sub.add_parser("fit-pca", help="fit and save a PCA model")
    pca.add_argument("--train", required=True, help=".fvec feature file")
    pca.add_argument("--dim", type=int, required=True)
    pca.add_argument("--out", required=True, help="output .rkpc path")
    pca.set_defaults(func=cmd_fit_pca)

    train = sub.add_parser("train", help="meta-train and save a ranker")
    _add_config_source(train, required=True)
    _add_overrides(train)
    train.add_argument("--ranker", choices=("mlp", "svm"), default="mlp")
    train.add_argument("--out", required=True, help="output file prefix")
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="episodic evaluation")
    _add_config_source(ev, required=False)
    _add_overrides(ev)
    _add_report_outputs(ev)
    ev.add_argument("--model", help="saved ranker prefix (from train --out)")
    ev.set_defaults(func=cmd_eval)

    ab = sub.add_parser("ablate", help="compare encoding schemes")
    _add_config_source(ab, required=True)
    _add_overrides(ab)
    ab.add_argument("--schemes", default=_ALL_SCHEMES,
                    help=f"comma list (default {_ALL_SCHEMES})")
    ab.set_defaults(func=cmd_ablate)

    cross = sub.add_parser("cross-eval",
                           help="train on one domain, evaluate on another")
    _add_config_source(cross, required=False)
    _add_overrides(cross)
    _add_report_outputs(cross)
    cross.set_defaults(func=cmd_cross_eval)

    plot = sub.add_parser("plot", help="training curves from a saved manifest")
    plot.add_argument("--model", required=True,
                      help="saved ranker prefix (reads <prefix>.json)")
    plot.add_argument("--out", required=True, help="output .svg path")
    plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "cross-eval":
        if not args.train_data or not args.test_data:
            parser.error("cross-eval requires --train-data and --test-data")
    if args.command == "eval" and not (args.model or args.config
                                       or args.benchmark):
        parser.error("eval needs --model, --config, or --benchmark")
    try:
        return args.func(args)
    except RankError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
