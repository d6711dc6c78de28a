"""Minimal native trainers for the tabular model families.

These exist so benchmarks run end-to-end without an ML framework: a CART
builder (weighted gini or MSE splits) shared by the tree families, an
L2-regularized logistic regression fit with L-BFGS, boosting on top of the
CART builder, and closed-form multinomial naive Bayes. They aim for the
standard decision rules, not for bit-parity with any particular library.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .data import LabeledDataset
from .errors import DegenerateData, NegativeFeatures, UnsupportedFamily
from .models import ModelSpec

_DEFAULTS = {
    "logreg": {"l2": 1.0, "max_iter": 1000},
    "dtree": {"max_depth": None},
    "rforest": {"n_trees": 100, "max_depth": None, "max_features": "sqrt"},
    "gboost": {"n_trees": 100, "max_depth": 3, "learning_rate": 0.1},
    "adaboost": {"n_stumps": 50},
    "mnb": {"alpha": 1.0},
}


class _TreeBuilder:
    """Grows one CART into parallel node arrays (children follow parents)."""

    def __init__(self, X, target, *, criterion, max_depth, n_classes=None,
                 sample_weight=None, max_features=None, rng=None):
        self.X = X
        self.target = target
        self.criterion = criterion  # "gini" or "mse"
        self.max_depth = math.inf if max_depth is None else max_depth
        self.n_classes = n_classes
        self.w = np.ones(len(X)) if sample_weight is None else sample_weight
        self.max_features = max_features
        self.rng = rng
        self.feature, self.threshold = [], []
        self.left, self.right = [], []
        self.leaf_payload = []

    def build(self) -> dict:
        self._grow(np.arange(len(self.X)), depth=0)
        payload_key = "leaf_class" if self.criterion == "gini" else "leaf_value"
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            payload_key: self.leaf_payload,
        }

    def _leaf_value(self, idx):
        w = self.w[idx]
        if self.criterion == "gini":
            counts = np.bincount(self.target[idx], weights=w, minlength=self.n_classes)
            return int(np.argmax(counts))  # tie -> lowest class
        return float(np.average(self.target[idx], weights=w))

    def _emit_leaf(self, idx) -> int:
        node = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf_payload.append(self._leaf_value(idx))
        return node

    def _grow(self, idx, depth) -> int:
        if depth >= self.max_depth or len(idx) < 2:
            return self._emit_leaf(idx)
        split = self._best_split(idx)
        if split is None:
            return self._emit_leaf(idx)
        f, thr = split
        node = len(self.feature)
        self.feature.append(f)
        self.threshold.append(thr)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf_payload.append(-1 if self.criterion == "gini" else 0.0)
        mask = self.X[idx, f] <= thr
        self.left[node] = self._grow(idx[mask], depth + 1)
        self.right[node] = self._grow(idx[~mask], depth + 1)
        return node

    def _candidate_features(self):
        d = self.X.shape[1]
        if self.max_features is None:
            return np.arange(d)
        m = max(1, int(round(math.sqrt(d)))) if self.max_features == "sqrt" else int(self.max_features)
        return self.rng.choice(d, size=min(m, d), replace=False)

    def _best_split(self, idx):
        w = self.w[idx]
        total_w = w.sum()
        if total_w <= 0:
            return None
        best = None
        best_score = self._node_impurity(idx) * total_w - 1e-12
        for f in self._candidate_features():
            xs = self.X[idx, f]
            order = np.argsort(xs, kind="stable")
            xs_sorted = xs[order]
            valid = xs_sorted[:-1] < xs_sorted[1:]
            if not valid.any():
                continue
            ws = w[order]
            cum_w = np.cumsum(ws)[:-1]
            rest_w = total_w - cum_w
            if self.criterion == "gini":
                onehot = np.zeros((len(idx), self.n_classes))
                onehot[np.arange(len(idx)), self.target[idx][order]] = 1.0
                cum_c = np.cumsum(onehot * ws[:, None], axis=0)[:-1]
                rest_c = cum_c[-1] + onehot[-1] * ws[-1] - cum_c
                with np.errstate(divide="ignore", invalid="ignore"):
                    gini_l = cum_w - (cum_c ** 2).sum(axis=1) / cum_w
                    gini_r = rest_w - (rest_c ** 2).sum(axis=1) / rest_w
                score = gini_l + gini_r
            else:
                r = self.target[idx][order]
                cum_s = np.cumsum(ws * r)[:-1]
                cum_q = np.cumsum(ws * r * r)[:-1]
                rest_s = (ws * r).sum() - cum_s
                rest_q = (ws * r * r).sum() - cum_q
                score = (cum_q - cum_s ** 2 / cum_w) + (rest_q - rest_s ** 2 / rest_w)
            score = np.where(valid, score, np.inf)
            pos = int(np.argmin(score))
            if score[pos] < best_score:
                best_score = score[pos]
                thr = 0.5 * (xs_sorted[pos] + xs_sorted[pos + 1])
                best = (int(f), float(thr))
        return best

    def _node_impurity(self, idx) -> float:
        w = self.w[idx]
        total = w.sum()
        if self.criterion == "gini":
            counts = np.bincount(self.target[idx], weights=w, minlength=self.n_classes)
            p = counts / total
            return float(1.0 - (p ** 2).sum())
        r = self.target[idx]
        mean = np.average(r, weights=w)
        return float(np.average((r - mean) ** 2, weights=w))


def _tree_apply(tree: dict, X) -> np.ndarray:
    """Leaf index for every row (vectorized descent)."""
    n = len(X)
    nodes = np.zeros(n, dtype=int)
    feature = np.asarray(tree["feature"])
    threshold = np.asarray(tree["threshold"])
    left = np.asarray(tree["left"])
    right = np.asarray(tree["right"])
    active = feature[nodes] != -1
    while active.any():
        rows = np.nonzero(active)[0]
        cur = nodes[rows]
        go_left = X[rows, feature[cur]] <= threshold[cur]
        nodes[rows] = np.where(go_left, left[cur], right[cur])
        active = feature[nodes] != -1
    return nodes


def _check_labels(data: LabeledDataset) -> int:
    classes = np.unique(data.labels)
    if len(classes) < 2:
        raise DegenerateData("training data contains a single class")
    return int(data.labels.max()) + 1


def _train_logreg(data, hyper, rng):
    n_classes = _check_labels(data)
    X, y = data.features, data.labels
    d = X.shape[1]
    l2 = hyper["l2"]

    if n_classes == 2:
        s = np.where(y == 1, 1.0, -1.0)

        def objective(wb):
            w, b = wb[:d], wb[d]
            z = s * (X @ w + b)
            loss = np.logaddexp(0.0, -z).sum() + 0.5 * l2 * (w @ w)
            sig = expit(-z)
            grad_z = -s * sig
            return loss, np.concatenate([X.T @ grad_z + l2 * w, [grad_z.sum()]])

        res = minimize(objective, np.zeros(d + 1), jac=True, method="L-BFGS-B",
                       options={"maxiter": hyper["max_iter"]})
        weights = [res.x[:d].tolist()]
        bias = [float(res.x[d])]
    else:
        onehot = np.eye(n_classes)[y]

        def objective(flat):
            W = flat[: n_classes * d].reshape(n_classes, d)
            b = flat[n_classes * d:]
            z = X @ W.T + b
            z -= z.max(axis=1, keepdims=True)
            logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
            loss = -(onehot * logp).sum() + 0.5 * l2 * (W ** 2).sum()
            p = np.exp(logp)
            grad_z = p - onehot
            grad_w = grad_z.T @ X + l2 * W
            return loss, np.concatenate([grad_w.ravel(), grad_z.sum(axis=0)])

        res = minimize(objective, np.zeros(n_classes * (d + 1)), jac=True,
                       method="L-BFGS-B", options={"maxiter": hyper["max_iter"]})
        weights = res.x[: n_classes * d].reshape(n_classes, d).tolist()
        bias = res.x[n_classes * d:].tolist()
    return ModelSpec("logreg", n_classes, d, {"weights": weights, "bias": bias})


def _train_dtree(data, hyper, rng):
    n_classes = _check_labels(data)
    tree = _TreeBuilder(
        data.features, data.labels, criterion="gini",
        max_depth=hyper["max_depth"], n_classes=n_classes,
    ).build()
    return ModelSpec("dtree", n_classes, data.n_features, tree)


def _train_rforest(data, hyper, rng):
    n_classes = _check_labels(data)
    n = data.n_samples
    trees = []
    for _ in range(hyper["n_trees"]):
        boot = rng.integers(0, n, size=n)
        trees.append(
            _TreeBuilder(
                data.features[boot], data.labels[boot], criterion="gini",
                max_depth=hyper["max_depth"], n_classes=n_classes,
                max_features=hyper["max_features"], rng=rng,
            ).build()
        )
    return ModelSpec("rforest", n_classes, data.n_features, {"trees": trees})


def _train_gboost(data, hyper, rng):
    n_classes = _check_labels(data)
    if n_classes != 2:
        raise UnsupportedFamily("gradient boosting trainer is binary only")
    X, y = data.features, data.labels.astype(float)
    p1 = y.mean()
    init = math.log(p1 / (1.0 - p1))
    lr = hyper["learning_rate"]
    score = np.full(len(X), init)
    trees = []
    for _ in range(hyper["n_trees"]):
        p = expit(score)
        residual = y - p
        tree = _TreeBuilder(
            X, residual, criterion="mse", max_depth=hyper["max_depth"]
        ).build()
        # Newton leaf update for the logistic loss
        leaves = _tree_apply(tree, X)
        hessian = p * (1.0 - p)
        values = list(tree["leaf_value"])
        for leaf in np.unique(leaves):
            mask = leaves == leaf
            denom = max(hessian[mask].sum(), 1e-12)
            values[leaf] = float(residual[mask].sum() / denom)
        tree["leaf_value"] = values
        score += lr * np.asarray(values)[leaves]
        trees.append(tree)
    params = {"init_score": init, "learning_rate": lr, "trees": trees}
    return ModelSpec("gboost", 2, data.n_features, params)


def _train_adaboost(data, hyper, rng):
    n_classes = _check_labels(data)
    X, y = data.features, data.labels
    n = len(X)
    w = np.full(n, 1.0 / n)
    stumps, alphas = [], []
    for _ in range(hyper["n_stumps"]):
        stump = _TreeBuilder(
            X, y, criterion="gini", max_depth=1,
            n_classes=n_classes, sample_weight=w,
        ).build()
        pred = np.asarray(stump["leaf_class"])[_tree_apply(stump, X)]
        wrong = pred != y
        err = float(w[wrong].sum())
        if err <= 0.0:
            stumps.append(stump)
            alphas.append(math.log(1e12))  # perfect stump dominates
            break
        if err >= 1.0 - 1.0 / n_classes:
            break  # no better than chance; stop boosting
        alpha = math.log((1.0 - err) / err) + math.log(n_classes - 1)
        stumps.append(stump)
        alphas.append(alpha)
        w = w * np.exp(alpha * wrong)
        w /= w.sum()
    if not stumps:
        raise DegenerateData("no useful stump could be fit")
    return ModelSpec(
        "adaboost", n_classes, data.n_features,
        {"stumps": stumps, "alphas": alphas},
    )


def _train_mnb(data, hyper, rng):
    n_classes = _check_labels(data)
    X, y = data.features, data.labels
    if (X < 0).any():
        raise NegativeFeatures("multinomial NB requires nonnegative features")
    alpha = hyper["alpha"]
    d = X.shape[1]
    log_prior, log_prob = [], []
    for c in range(n_classes):
        rows = X[y == c]
        log_prior.append(math.log(max(len(rows), 1e-300) / len(X)))
        counts = rows.sum(axis=0) + alpha
        log_prob.append(np.log(counts / counts.sum()).tolist())
    return ModelSpec(
        "mnb", n_classes, d,
        {"class_log_prior": log_prior, "feature_log_prob": log_prob},
    )


_TRAINERS = {
    "logreg": _train_logreg,
    "dtree": _train_dtree,
    "rforest": _train_rforest,
    "gboost": _train_gboost,
    "adaboost": _train_adaboost,
    "mnb": _train_mnb,
}


def train_tabular_model(
    family: str,
    data: LabeledDataset,
    hyper: dict | None = None,
    seed: int = 0,
) -> ModelSpec:
    """Train one of the six tabular families; deterministic given seed."""
    if family not in _TRAINERS:
        raise UnsupportedFamily(f"no trainer for family {family!r}")
    merged = dict(_DEFAULTS[family])
    if hyper:
        unknown = hyper.keys() - merged.keys()
        if unknown:
            raise ValueError(f"unknown hyperparameters for {family}: {sorted(unknown)}")
        merged.update(hyper)
    rng = np.random.default_rng(seed)
    return _TRAINERS[family](data, merged, rng)
