"""Victim model zoo: interchange format, native inference, toy 2D classifiers.

A :class:`ModelSpec` is a plain-parameter description of one of seven model
families. Inference is implemented natively here so that attacks and
benchmarks run without any ML framework. Serialized specs use a single JSON
document (``format_version`` 1) whose floats carry 17 significant digits so
round trips are bit-exact.

Tree node arrays are parallel lists indexed by node id; node 0 is the root,
``feature == -1`` marks a leaf, and descent goes left when
``x[feature] <= threshold``. Children always have larger ids than their
parent, which rules out cycles.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MalformedModel, SchemaError

FAMILIES = ("logreg", "dtree", "rforest", "gboost", "adaboost", "mnb", "mlp")

_TREE_KEYS = {"feature", "threshold", "left", "right"}

_PARAM_KEYS = {
    "logreg": {"weights", "bias"},
    "dtree": _TREE_KEYS | {"leaf_class"},
    "rforest": {"trees"},
    "gboost": {"init_score", "learning_rate", "trees"},
    "adaboost": {"stumps", "alphas"},
    "mnb": {"class_log_prior", "feature_log_prob"},
    "mlp": {"layers"},
}


@dataclass
class ModelSpec:
    """A serialized victim model: family tag plus family-specific params."""

    family: str
    n_classes: int
    n_features: int
    params: dict

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise MalformedModel(f"unknown family {self.family!r}")
        if self.n_classes < 2 or self.n_features < 1:
            raise MalformedModel("need n_classes >= 2 and n_features >= 1")
        validator = _VALIDATORS[self.family]
        validator(self)

    def predict(self, x) -> int:
        """Deterministic top-1 label for a single point."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_features,):
            raise DimensionMismatch(
                f"expected {self.n_features} features, got shape {x.shape}"
            )
        return _PREDICTORS[self.family](self, x)


# ---------------------------------------------------------------------------
# Tree helpers
# ---------------------------------------------------------------------------

def _check_tree(tree: dict, n_features: int, leaf_key: str) -> None:
    for key in _TREE_KEYS | {leaf_key}:
        if key not in tree:
            raise MalformedModel(f"tree missing array {key!r}")
    n = len(tree["feature"])
    arrays = [tree[k] for k in ("threshold", "left", "right", leaf_key)]
    if any(len(a) != n for a in arrays):
        raise MalformedModel("tree node arrays have inconsistent lengths")
    if n == 0:
        raise MalformedModel("empty tree")
    for i in range(n):
        f = tree["feature"][i]
        if f == -1:
            continue  # leaf; leaf payload checked by the caller
        if not 0 <= f < n_features:
            raise MalformedModel(f"node {i}: feature index {f} out of range")
        left, right = tree["left"][i], tree["right"][i]
        for child in (left, right):
            if not 0 <= child < n:
                raise MalformedModel(f"node {i}: child index {child} out of range")
            if child <= i:
                raise MalformedModel(f"node {i}: child {child} does not follow parent")


def _tree_descend(tree: dict, x) -> int:
    feature = tree["feature"]
    threshold = tree["threshold"]
    left, right = tree["left"], tree["right"]
    i = 0
    while feature[i] != -1:
        i = left[i] if x[feature[i]] <= threshold[i] else right[i]
    return i


def tree_predict_class(tree: dict, x) -> int:
    return tree["leaf_class"][_tree_descend(tree, x)]


def tree_predict_value(tree: dict, x) -> float:
    return tree["leaf_value"][_tree_descend(tree, x)]


# ---------------------------------------------------------------------------
# Per-family validation
# ---------------------------------------------------------------------------

def _validate_logreg(spec: ModelSpec) -> None:
    w = np.asarray(spec.params["weights"], dtype=float)
    b = np.asarray(spec.params["bias"], dtype=float)
    if w.ndim != 2 or w.shape[1] != spec.n_features:
        raise MalformedModel("logreg weights must be (rows, n_features)")
    rows = w.shape[0]
    if rows not in (1, spec.n_classes):
        raise MalformedModel("logreg needs 1 (binary) or n_classes weight rows")
    if rows == 1 and spec.n_classes != 2:
        raise MalformedModel("single-row logreg is binary only")
    if b.shape != (rows,):
        raise MalformedModel("logreg bias length must match weight rows")
    if not (np.isfinite(w).all() and np.isfinite(b).all()):
        raise MalformedModel("logreg parameters must be finite")


def _validate_class_tree(spec: ModelSpec, tree: dict) -> None:
    _check_tree(tree, spec.n_features, "leaf_class")
    for i, f in enumerate(tree["feature"]):
        c = tree["leaf_class"][i]
        if f == -1:
            if not 0 <= c < spec.n_classes:
                raise MalformedModel(f"leaf {i}: class {c} out of range")
        elif c != -1:
            raise MalformedModel(f"internal node {i} carries a leaf class")


def _validate_dtree(spec: ModelSpec) -> None:
    _validate_class_tree(spec, spec.params)


def _validate_rforest(spec: ModelSpec) -> None:
    trees = spec.params["trees"]
    if not trees:
        raise MalformedModel("forest needs at least one tree")
    for tree in trees:
        _validate_class_tree(spec, tree)


def _validate_gboost(spec: ModelSpec) -> None:
    if spec.n_classes != 2:
        raise MalformedModel("gradient boosting supports binary models only")
    if not math.isfinite(spec.params["init_score"]):
        raise MalformedModel("init_score must be finite")
    for tree in spec.params["trees"]:
        _check_tree(tree, spec.n_features, "leaf_value")
        if not all(math.isfinite(v) for v in tree["leaf_value"]):
            raise MalformedModel("leaf values must be finite")


def _validate_adaboost(spec: ModelSpec) -> None:
    stumps, alphas = spec.params["stumps"], spec.params["alphas"]
    if len(stumps) != len(alphas) or not stumps:
        raise MalformedModel("adaboost needs matching, nonempty stumps and alphas")
    if not all(math.isfinite(a) for a in alphas):
        raise MalformedModel("alphas must be finite")
    for stump in stumps:
        _validate_class_tree(spec, stump)


def _validate_mnb(spec: ModelSpec) -> None:
    prior = np.asarray(spec.params["class_log_prior"], dtype=float)
    logp = np.asarray(spec.params["feature_log_prob"], dtype=float)
    if prior.shape != (spec.n_classes,):
        raise MalformedModel("class_log_prior must have n_classes entries")
    if logp.shape != (spec.n_classes, spec.n_features):
        raise MalformedModel("feature_log_prob must be (n_classes, n_features)")
    if not (np.isfinite(prior).all() and np.isfinite(logp).all()):
        raise MalformedModel("mnb log-probabilities must be finite")
    # each class row is a normalized distribution over features
    lse = np.log(np.exp(logp - logp.max(axis=1, keepdims=True)).sum(axis=1))
    lse += logp.max(axis=1)
    if np.abs(lse).max() > 1e-6:
        raise MalformedModel("mnb feature distributions are not normalized")


def _validate_mlp(spec: ModelSpec) -> None:
    layers = spec.params["layers"]
    if not layers:
        raise MalformedModel("mlp needs at least one layer")
    in_dim = spec.n_features
    for k, layer in enumerate(layers):
        w = np.asarray(layer["weights"], dtype=float)
        b = np.asarray(layer["bias"], dtype=float)
        if w.ndim != 2 or w.shape[0] != in_dim:
            raise MalformedModel(f"layer {k}: weight shape breaks the chain")
        if b.shape != (w.shape[1],):
            raise MalformedModel(f"layer {k}: bias length mismatch")
        if layer.get("activation") not in ("relu", "identity"):
            raise MalformedModel(f"layer {k}: unknown activation")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise MalformedModel(f"layer {k}: parameters must be finite")
        in_dim = w.shape[1]
    if in_dim not in (1, spec.n_classes):
        raise MalformedModel("final layer width must be 1 (binary) or n_classes")


_VALIDATORS = {
    "logreg": _validate_logreg,
    "dtree": _validate_dtree,
    "rforest": _validate_rforest,
    "gboost": _validate_gboost,
    "adaboost": _validate_adaboost,
    "mnb": _validate_mnb,
    "mlp": _validate_mlp,
}


# ---------------------------------------------------------------------------
# Per-family prediction
# ---------------------------------------------------------------------------

def _predict_logreg(spec: ModelSpec, x) -> int:
    w = np.asarray(spec.params["weights"], dtype=float)
    b = np.asarray(spec.params["bias"], dtype=float)
    scores = w @ x + b
    if len(scores) == 1:
        return 1 if scores[0] > 0 else 0
    return int(np.argmax(scores))


def _predict_dtree(spec: ModelSpec, x) -> int:
    return tree_predict_class(spec.params, x)


def _predict_rforest(spec: ModelSpec, x) -> int:
    votes = [0] * spec.n_classes
    for tree in spec.params["trees"]:
        votes[tree_predict_class(tree, x)] += 1
    best = max(votes)
    return votes.index(best)  # tie -> lowest class index


def _predict_gboost(spec: ModelSpec, x) -> int:
    score = spec.params["init_score"]
    lr = spec.params["learning_rate"]
    for tree in spec.params["trees"]:
        score += lr * tree_predict_value(tree, x)
    return 1 if score > 0 else 0


def _predict_adaboost(spec: ModelSpec, x) -> int:
    votes = [0.0] * spec.n_classes
    for stump, alpha in zip(spec.params["stumps"], spec.params["alphas"]):
        votes[tree_predict_class(stump, x)] += alpha
    best = max(votes)
    return votes.index(best)


def _predict_mnb(spec: ModelSpec, x) -> int:
    prior = np.asarray(spec.params["class_log_prior"], dtype=float)
    logp = np.asarray(spec.params["feature_log_prob"], dtype=float)
    return int(np.argmax(prior + logp @ x))


def _predict_mlp(spec: ModelSpec, x) -> int:
    h = x
    for layer in spec.params["layers"]:
        w = np.asarray(layer["weights"], dtype=float)
        b = np.asarray(layer["bias"], dtype=float)
        h = h @ w + b
        if layer["activation"] == "relu":
            h = np.maximum(h, 0.0)
    if len(h) == 1:
        return 1 if h[0] > 0 else 0
    return int(np.argmax(h))


_PREDICTORS = {
    "logreg": _predict_logreg,
    "dtree": _predict_dtree,
    "rforest": _predict_rforest,
    "gboost": _predict_gboost,
    "adaboost": _predict_adaboost,
    "mnb": _predict_mnb,
    "mlp": _predict_mlp,
}


def predict(model: ModelSpec, x) -> int:
    return model.predict(x)


# ---------------------------------------------------------------------------
# Interchange format
# ---------------------------------------------------------------------------

def _format_scalar(v) -> str:
    if isinstance(v, bool):
        raise SchemaError("booleans are not part of the interchange format")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            raise SchemaError("non-finite number cannot be serialized")
        return format(v, ".17g")
    if isinstance(v, str):
        return json.dumps(v)
    raise SchemaError(f"unsupported value type {type(v).__name__}")


def _dump_json(obj, indent: int = 0) -> str:
    pad, pad_in = " " * indent, " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f"{pad_in}{json.dumps(str(k))}: {_dump_json(v, indent + 2)}"
            for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) for v in seq):
            return "[" + ", ".join(_format_scalar(v) for v in seq) + "]"
        items = ",\n".join(pad_in + _dump_json(v, indent + 2) for v in seq)
        return "[\n" + items + "\n" + pad + "]"
    return _format_scalar(obj)


def save_model_spec(spec: ModelSpec, path: str) -> None:
    """Write the interchange JSON (floats at 17 significant digits)."""
    doc = {
        "format_version": 1,
        "family": spec.family,
        "n_classes": spec.n_classes,
        "n_features": spec.n_features,
        "params": spec.params,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dump_json(doc))
        fh.write("\n")


_TOP_KEYS = {"format_version", "family", "n_classes", "n_features", "params"}


def load_model_spec(path: str) -> ModelSpec:
    """Parse and validate an interchange JSON file."""
    if not os.path.exists(path):
        raise SchemaError(f"no such model file: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("top-level document must be an object")
    missing = _TOP_KEYS - doc.keys()
    extra = doc.keys() - _TOP_KEYS
    if missing or extra:
        raise SchemaError(f"bad top-level keys (missing={sorted(missing)}, extra={sorted(extra)})")
    if doc["format_version"] != 1:
        raise SchemaError(f"unsupported format_version {doc['format_version']!r}")
    family = doc["family"]
    if family not in FAMILIES:
        raise SchemaError(f"unknown family {family!r}")
    for key in ("n_classes", "n_features"):
        if not isinstance(doc[key], int) or isinstance(doc[key], bool):
            raise SchemaError(f"{key} must be an integer")
    params = doc["params"]
    if not isinstance(params, dict):
        raise SchemaError("params must be an object")
    expected = _PARAM_KEYS[family]
    if params.keys() != expected:
        raise SchemaError(
            f"params keys for {family} must be {sorted(expected)}, "
            f"got {sorted(params.keys())}"
        )
    return ModelSpec(family, doc["n_classes"], doc["n_features"], params)


# ---------------------------------------------------------------------------
# Analytic 2D toy classifiers
# ---------------------------------------------------------------------------

def _f1(x: float, y: float) -> float:
    return x + y + 0.1


def _f2(x: float, y: float) -> float:
    return math.sin(100 * x + 100 * y + 1)


def _f3(x: float, y: float) -> float:
    return math.sin(20 * x + 0.5) ** 2 + math.cos(10 * y + 0.1) ** 2 - 0.7


def _f4(x: float, y: float) -> float:
    return sum(
        math.sin(15 * (a + 5) * x + 1) + math.sin(15 * (a + 2) * y + 4)
        for a in range(11)
    )


TOY_FUNCTIONS = {"f1": _f1, "f2": _f2, "f3": _f3, "f4": _f4}


@dataclass(frozen=True)
class Toy2DClassifier:
    """Binary classifier on R^2: label 1 iff fn(x, y) <= 0, else 0."""

    fn_id: str

    n_classes = 2
    n_features = 2

    def __post_init__(self):
        if self.fn_id not in TOY_FUNCTIONS:
            raise ValueError(f"unknown toy function {self.fn_id!r}")

    def predict(self, point) -> int:
        x, y = float(point[0]), float(point[1])
        return 1 if TOY_FUNCTIONS[self.fn_id](x, y) <= 0 else 0


def toy2d_classify(fn_id: str, point) -> int:
    return Toy2DClassifier(fn_id).predict(point)
