"""Benchmark harness: sample selection, multi-run execution, metrics, traces."""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .attack import AttackConfig, AttackResult, run_attack
from .data import LabeledDataset
from .errors import EmptyList, InitializationFailed, IoError, NoCorrectPredictions
from .models import ModelSpec
from .oracle import DecisionOracle, QueryLedger


def avg_l2(pairs) -> float:
    """Mean Euclidean distance over (x0, x0_star) pairs."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyList("avg_l2 of an empty list")
    total = 0.0
    for x0, x_star in pairs:
        x0 = np.asarray(x0, dtype=float)
        x_star = np.asarray(x_star, dtype=float)
        if x0.shape != x_star.shape:
            raise ValueError("pair dimensions disagree")
        total += float(np.linalg.norm(x0 - x_star))
    return total / len(pairs)


def select_eval_samples(
    model: ModelSpec,
    data: LabeledDataset,
    n: int,
    seed: int,
) -> list[tuple[np.ndarray, int]]:
    """Seeded uniform subset of correctly classified points.

    Returns fewer than n pairs when the pool is smaller; callers detect the
    shortfall from the returned length.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    correct = [
        i for i in range(data.n_samples)
        if model.predict(data.features[i]) == data.labels[i]
    ]
    if not correct:
        raise NoCorrectPredictions("model classifies no dataset point correctly")
    rng = np.random.default_rng(seed)
    if len(correct) > n:
        chosen = rng.choice(len(correct), size=n, replace=False)
        correct = [correct[i] for i in sorted(chosen)]
    return [(data.features[i].copy(), int(data.labels[i])) for i in correct]


def split_dataset(
    data: LabeledDataset, train_fraction: float, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded shuffle split into (train, held-out) parts."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    order = rng.permutation(data.n_samples)
    n_train = max(1, int(round(train_fraction * data.n_samples)))
    tr, ev = order[:n_train], order[n_train:]
    if len(ev) == 0:
        raise ValueError("split leaves no held-out samples")
    make = lambda idx: LabeledDataset(
        data.features[idx], data.labels[idx], data.feature_names
    )
    return make(tr), make(ev)


def derive_seed(master_seed: int, *parts) -> int:
    """Stable per-run seed so runs are order-independent."""
    digest = hashlib.blake2b(
        ":".join([str(master_seed), *map(str, parts)]).encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


@dataclass
class BenchRow:
    model: str
    config: str
    n_samples: int
    budget: int
    avg_l2: float | None
    success_count: int
    failure_count: int
    mean_queries: float | None
    shortfall: int = 0


@dataclass
class BenchRun:
    """One attack run with enough identity for trace file naming."""

    model: str
    config: str
    sample_index: int
    x0: np.ndarray
    result: AttackResult | None  # None when initialization failed


@dataclass
class BenchReport:
    rows: list[BenchRow]
    seed: int
    budget: int
    timestamp: str
    configs: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {
            "seed": self.seed,
            "budget": self.budget,
            "timestamp": self.timestamp,
            "configs": self.configs,
            "rows": [asdict(row) for row in self.rows],
        }
        return json.dumps(doc, indent=2)

    def to_table(self) -> str:
        header = f"{'model':<10} {'config':<22} {'n':>4} {'avg_l2':>10} {'ok':>4} {'fail':>5} {'queries':>9}"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            a = f"{r.avg_l2:.4f}" if r.avg_l2 is not None else "-"
            q = f"{r.mean_queries:.1f}" if r.mean_queries is not None else "-"
            lines.append(
                f"{r.model:<10} {r.config:<22} {r.n_samples:>4} {a:>10} "
                f"{r.success_count:>4} {r.failure_count:>5} {q:>9}"
            )
        return "\n".join(lines)


def _run_one(args):
    model, model_name, cfg_name, cfg, x0, y0, sample_index = args
    oracle = DecisionOracle(model, QueryLedger(cfg.budget))
    try:
        result = run_attack(oracle, x0, y0, cfg)
    except InitializationFailed:
        result = None
    return BenchRun(model_name, cfg_name, sample_index, x0, result)


def run_benchmark(
    models: list[tuple[str, ModelSpec]],
    data: LabeledDataset,
    attack_cfgs: list[tuple[str, AttackConfig]],
    n_samples: int,
    budget: int,
    seed: int,
    jobs: int = 1,
) -> tuple[BenchReport, list[BenchRun]]:
    """Attack every (model, config, sample) combination and aggregate.

    Per-sample seeds are derived from (seed, model, config, sample index),
    so results do not depend on execution order and the fan-out across
    workers is deterministic. Failed initializations are excluded from
    avg_l2 but counted.
    """
    tasks = []
    for model_name, model in models:
        if model.n_features != data.n_features:
            raise ValueError(f"model {model_name} dimension != dataset dimension")
        samples = select_eval_samples(
            model, data, n_samples, derive_seed(seed, model_name, "select")
        )
        for cfg_name, cfg in attack_cfgs:
            for k, (x0, y0) in enumerate(samples):
                run_cfg = replace(
                    cfg,
                    budget=budget,
                    seed=derive_seed(seed, model_name, cfg_name, k),
                )
                tasks.append((model, model_name, cfg_name, run_cfg, x0, y0, k))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run_one, tasks, chunksize=4))
    else:
        runs = [_run_one(task) for task in tasks]

    rows = []
    for model_name, _ in models:
        for cfg_name, _ in attack_cfgs:
            group = [r for r in runs if r.model == model_name and r.config == cfg_name]
            ok = [r for r in group if r.result is not None]
            pairs = [(r.x0, r.result.adversarial_point) for r in ok]
            rows.append(
                BenchRow(
                    model=model_name,
                    config=cfg_name,
                    n_samples=len(group),
                    budget=budget,
                    avg_l2=avg_l2(pairs) if pairs else None,
                    success_count=len(ok),
                    failure_count=len(group) - len(ok),
                    mean_queries=(
                        float(np.mean([r.result.queries_used for r in ok])) if ok else None
                    ),
                    shortfall=max(0, n_samples - len(group)),
                )
            )
    report = BenchReport(
        rows=rows,
        seed=seed,
        budget=budget,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%S"),
        configs={name: asdict(cfg) for name, cfg in attack_cfgs},
    )
    return report, runs


TRACE_FIELDS = ("t", "queries_used", "g_best", "accepted", "ratio", "binsearch_queries")


def emit_traces(runs: list[BenchRun], out_dir: str) -> list[str]:
    """Per-run trace CSVs plus aggregated series for plotting."""
    if not runs:
        raise EmptyList("no runs to emit")
    try:
        os.makedirs(out_dir, exist_ok=True)
        written = []
        ratio_by_t: dict[int, list[float]] = {}
        probes_by_acc: dict[int, list[int]] = {}
        for run in runs:
            if run.result is None:
                continue
            name = f"run_{run.model}_{run.config}_{run.sample_index}.csv"
            path = os.path.join(out_dir, name)
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(TRACE_FIELDS)
                acc_ordinal = 0
                for row in run.result.trace.rows:
                    writer.writerow([
                        row.t, row.queries_used, repr(row.g_best),
                        int(row.accepted),
                        "" if row.ratio is None else repr(row.ratio),
                        row.binsearch_queries,
                    ])
                    if row.accepted:
                        ratio_by_t.setdefault(row.t, []).append(row.ratio)
                        probes_by_acc.setdefault(acc_ordinal, []).append(row.binsearch_queries)
                        acc_ordinal += 1
            written.append(path)

        for fname, series in (
            ("aggregate_ratio_by_iteration.csv", ratio_by_t),
            ("aggregate_binsearch_by_acceptance.csv", probes_by_acc),
        ):
            path = os.path.join(out_dir, fname)
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["index", "mean", "count"])
                for key in sorted(series):
                    values = series[key]
                    writer.writerow([key, repr(float(np.mean(values))), len(values)])
            written.append(path)
        return written
    except OSError as exc:
        raise IoError(str(exc)) from exc
