"""Command-line front end.

Subcommands: train, attack, bench, toy2d, validate-theorem1. Exit codes:
0 success, 1 expected/runtime errors (message on stderr), 2 usage errors.
Benchmark and attack definitions live in JSON config files; flags override
individual config fields so runs stay versionable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .attack import AttackConfig, attack_toy2d, run_attack, validate_theorem1
from .bench import derive_seed, emit_traces, run_benchmark, select_eval_samples
from .data import load_csv_dataset
from .errors import DeltaBoundError, IoError
from .models import ModelSpec, load_model_spec, save_model_spec
from .oracle import DecisionOracle, QueryLedger
from .sampling import SamplerConfig
from .training import train_tabular_model

F1_OPTIMUM = 0.1 / np.sqrt(2.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deltabound",
        description="Hard-label black-box adversarial attack toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="train a tabular model on a CSV dataset")
    tr.add_argument("--family", required=True)
    tr.add_argument("--data", required=True)
    tr.add_argument("--label-col", required=True)
    tr.add_argument("--ignore-col", action="append", default=[])
    tr.add_argument("--positive-label")
    tr.add_argument("--hyper", help="JSON object of hyperparameter overrides")
    tr.add_argument("--out", required=True)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--format", choices=("text", "json"), default="text")

    at = sub.add_parser("attack", help="attack one point against a saved model")
    at.add_argument("--model", required=True)
    src = at.add_mutually_exclusive_group(required=True)
    src.add_argument("--point", help="comma-separated feature values")
    src.add_argument("--index", type=int, help="row of --data to attack")
    src.add_argument("--points-file",
                     help="file of comma-separated points, one per line "
                          "(only with --predict-only)")
    at.add_argument("--data")
    at.add_argument("--label-col")
    at.add_argument("--ignore-col", action="append", default=[])
    at.add_argument("--positive-label")
    at.add_argument("--budget", type=int)
    at.add_argument("--seed", type=int)
    at.add_argument("--config", help="JSON attack config file")
    at.add_argument("--trace-out")
    at.add_argument("--predict-only", action="store_true",
                    help="print the model's label for the point and stop")
    at.add_argument("--format", choices=("text", "json"), default="text")

    be = sub.add_parser("bench", help="run a benchmark config")
    be.add_argument("--config", required=True)
    be.add_argument("--out-dir")
    be.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    be.add_argument("--format", choices=("text", "json"), default="text")

    toy = sub.add_parser("toy2d", help="attack an analytic 2D classifier")
    toy.add_argument("--fn", required=True, choices=("f1", "f2", "f3", "f4"))
    toy.add_argument("--budget", type=int, default=300)
    toy.add_argument("--seeds", type=int, default=20)
    toy.add_argument("--config")
    toy.add_argument("--format", choices=("text", "json"), default="text")

    th = sub.add_parser("validate-theorem1",
                        help="Monte-Carlo check of the acceptance probability")
    th.add_argument("--dim", type=int, default=10)
    th.add_argument("--delta", type=float, default=0.99)
    th.add_argument("--p", type=float, default=0.05)
    th.add_argument("--samples", type=int, default=1_000_000)
    th.add_argument("--seed", type=int, default=0)
    th.add_argument("--g0", type=float, default=1.0)
    th.add_argument("--w-norm", type=float, default=0.1)
    th.add_argument("--format", choices=("text", "json"), default="text")

    return parser


def _attack_config_from(doc: dict) -> AttackConfig:
    doc = dict(doc)
    sampler = doc.pop("sampler", None)
    if sampler is not None:
        if isinstance(sampler.get("image_shape"), list):
            sampler["image_shape"] = tuple(sampler["image_shape"])
        doc["sampler"] = SamplerConfig(**sampler)
    return AttackConfig(**doc)


def _read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise IoError(str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise IoError(f"{path}: {exc}") from exc


def _emit(payload: dict, text: str, fmt: str) -> None:
    print(json.dumps(payload, indent=2) if fmt == "json" else text)


def _cmd_train(args) -> int:
    data = load_csv_dataset(
        args.data, args.label_col,
        positive_label=args.positive_label,
        ignore_columns=args.ignore_col,
    )
    hyper = json.loads(args.hyper) if args.hyper else None
    model = train_tabular_model(args.family, data, hyper, seed=args.seed)
    save_model_spec(model, args.out)
    correct = sum(
        model.predict(data.features[i]) == data.labels[i]
        for i in range(data.n_samples)
    )
    acc = correct / data.n_samples
    _emit(
        {"family": args.family, "out": args.out, "train_accuracy": acc,
         "n_samples": data.n_samples, "n_features": data.n_features},
        f"trained {args.family} on {data.n_samples} samples "
        f"(train accuracy {acc:.4f}) -> {args.out}",
        args.format,
    )
    return 0


def _resolve_point(args, model: ModelSpec):
    if args.point is not None:
        x0 = np.array([float(v) for v in args.point.split(",")], dtype=float)
        return x0, None
    if args.data is None or args.label_col is None:
        raise IoError("--index requires --data and --label-col")
    data = load_csv_dataset(args.data, args.label_col,
                            positive_label=args.positive_label,
                            ignore_columns=args.ignore_col)
    if not 0 <= args.index < data.n_samples:
        raise IoError(f"--index {args.index} outside dataset of {data.n_samples}")
    return data.features[args.index].copy(), int(data.labels[args.index])


def _cmd_attack(args) -> int:
    model = load_model_spec(args.model)

    if args.points_file is not None:
        if not args.predict_only:
            raise IoError("--points-file requires --predict-only")
        try:
            with open(args.points_file, encoding="utf-8") as fh:
                lines = [ln.strip() for ln in fh if ln.strip()]
        except OSError as exc:
            raise IoError(str(exc)) from exc
        labels = [
            model.predict(np.array([float(v) for v in ln.split(",")]))
            for ln in lines
        ]
        _emit({"labels": labels}, "\n".join(str(v) for v in labels), args.format)
        return 0

    x0, y_data = _resolve_point(args, model)

    if args.predict_only:
        label = model.predict(x0)
        _emit({"label": label}, str(label), args.format)
        return 0

    cfg_doc = _read_json(args.config) if args.config else {}
    if args.budget is not None:
        cfg_doc["budget"] = args.budget
    if args.seed is not None:
        cfg_doc["seed"] = args.seed
    cfg = _attack_config_from(cfg_doc)

    y0 = y_data if y_data is not None else model.predict(x0)
    oracle = DecisionOracle(model, QueryLedger(cfg.budget))
    result = run_attack(oracle, x0, y0, cfg)

    if args.trace_out:
        from .bench import BenchRun
        emit_traces(
            [BenchRun("model", "cli", args.index or 0, x0, result)],
            args.trace_out,
        )
    _emit(
        {
            "distance": result.distance,
            "queries_used": result.queries_used,
            "adversarial_point": result.adversarial_point.tolist(),
            "adversarial_label": model.predict(result.adversarial_point),
        },
        f"distance {result.distance:.6f} after {result.queries_used} queries "
        f"(label {model.predict(result.adversarial_point)})",
        args.format,
    )
    return 0


def _load_bench_models(doc: dict, data, seed: int):
    models = []
    for entry in doc["models"]:
        if isinstance(entry, str):
            spec = load_model_spec(entry)
            name = spec.family
        else:
            family = entry["train"]
            spec = train_tabular_model(
                family, data, entry.get("hyper"),
                seed=derive_seed(seed, family, "train"),
            )
            name = entry.get("name", family)
        models.append((name, spec))
    return models


def _cmd_bench(args) -> int:
    doc = _read_json(args.config)
    ds = doc["dataset"]
    data = load_csv_dataset(
        ds["path"], ds["label_column"],
        positive_label=ds.get("positive_label"),
        ignore_columns=ds.get("ignore_columns", []),
    )
    seed = doc.get("seed", 0)
    train_data, eval_data = data, data
    split = doc.get("train_fraction")
    if split is not None:
        from .bench import split_dataset
        train_data, eval_data = split_dataset(data, split, derive_seed(seed, "split"))
    models = _load_bench_models(doc, train_data, seed)
    attack_cfgs = [
        (name, _attack_config_from(c))
        for name, c in doc["attack_configs"].items()
    ]
    report, runs = run_benchmark(
        models, eval_data, attack_cfgs,
        n_samples=doc["n_samples"], budget=doc["budget"],
        seed=seed, jobs=args.jobs,
    )
    if args.out_dir:
        try:
            os.makedirs(args.out_dir, exist_ok=True)
            with open(os.path.join(args.out_dir, "report.json"), "w",
                      encoding="utf-8") as fh:
                fh.write(report.to_json())
            with open(os.path.join(args.out_dir, "report.txt"), "w",
                      encoding="utf-8") as fh:
                fh.write(report.to_table() + "\n")
        except OSError as exc:
            raise IoError(str(exc)) from exc
        emit_traces(runs, os.path.join(args.out_dir, "traces"))
    print(report.to_json() if args.format == "json" else report.to_table())
    return 0


def _cmd_toy2d(args) -> int:
    cfg_doc = _read_json(args.config) if args.config else {}
    cfg_doc.setdefault("delta_factor", 0.05)
    distances = []
    for s in range(args.seeds):
        cfg = _attack_config_from({**cfg_doc, "budget": args.budget, "seed": s})
        distances.append(attack_toy2d(args.fn, cfg).distance)
    median = float(np.median(distances))
    payload = {
        "fn": args.fn, "budget": args.budget, "seeds": args.seeds,
        "median_distance": median, "distances": distances,
    }
    text = f"{args.fn}: median final distance {median:.6f} over {args.seeds} seeds"
    if args.fn == "f1":
        payload["analytic_optimum"] = F1_OPTIMUM
        text += f" (analytic optimum {F1_OPTIMUM:.5f})"
    _emit(payload, text, args.format)
    return 0


def _cmd_validate_theorem1(args) -> int:
    w = np.zeros(args.dim)
    w[0] = args.w_norm
    empirical, predicted = validate_theorem1(
        args.g0, w, args.delta, args.p, args.samples,
        np.random.default_rng(args.seed),
    )
    _emit(
        {"empirical": empirical, "predicted": predicted,
         "abs_error": abs(empirical - predicted)},
        f"empirical {empirical:.5f} vs predicted {predicted:.5f}",
        args.format,
    )
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "attack": _cmd_attack,
    "bench": _cmd_bench,
    "toy2d": _cmd_toy2d,
    "validate-theorem1": _cmd_validate_theorem1,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DeltaBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
