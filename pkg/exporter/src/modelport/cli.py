"""Command-line front end: export a pickled estimator, verify an export."""

from __future__ import annotations

import argparse
import json
import pickle
import sys

from .convert import FAMILIES, export_model
from .errors import ExportError
from .verify import verify_roundtrip


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modelport",
        description="Export scikit-learn classifiers to the deltabound "
                    "model interchange format",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("export", help="convert a pickled estimator to JSON")
    ex.add_argument("--family", choices=FAMILIES,
                    help="expected family; errors when it does not match")
    ex.add_argument("--input", required=True, help="pickled fitted estimator")
    ex.add_argument("--out", required=True, help="output JSON path")
    ex.add_argument("--format", choices=("text", "json"), default="text")

    ve = sub.add_parser("verify",
                        help="check prediction agreement of an exported model")
    ve.add_argument("--model", required=True, help="exported JSON")
    ve.add_argument("--source", required=True, help="pickled fitted estimator")
    ve.add_argument("--n", type=int, default=100)
    ve.add_argument("--seed", type=int, default=7)
    ve.add_argument("--format", choices=("text", "json"), default="text")

    return parser


def _load_pickle(path: str):
    try:
        with open(path, "rb") as fh:
            return pickle.load(fh)
    except (OSError, pickle.UnpicklingError) as exc:
        raise ExportError(f"cannot load estimator from {path}: {exc}") from exc


def _cmd_export(args) -> int:
    model = _load_pickle(args.input)
    manifest = export_model(model, args.out, family=args.family)
    if args.format == "json":
        print(json.dumps(manifest, indent=2))
    else:
        print(f"exported {manifest['family']} "
              f"({manifest['n_classes']} classes, "
              f"{manifest['n_features']} features) -> {manifest['out']}")
    return 0


def _cmd_verify(args) -> int:
    model = _load_pickle(args.source)
    rate = verify_roundtrip(model, args.model, n_points=args.n, seed=args.seed)
    if args.format == "json":
        print(json.dumps({"agreement": rate, "n_points": args.n}))
    else:
        print(f"agreement {rate:.4f} on {args.n} points")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = _cmd_export if args.command == "export" else _cmd_verify
    try:
        return command(args)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
