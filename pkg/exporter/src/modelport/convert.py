"""scikit-learn estimator -> interchange JSON conversion.

The output schema matches the deltabound model format: a single JSON object
with format_version, family, n_classes, n_features and family-specific
params. Floats are written with 17 significant digits so an export is
byte-stable and reloads bit-exactly.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import ExtractionError, UnsupportedFamily

_FAMILY_BY_CLASS = {
    "LogisticRegression": "logreg",
    "DecisionTreeClassifier": "dtree",
    "RandomForestClassifier": "rforest",
    "GradientBoostingClassifier": "gboost",
    "AdaBoostClassifier": "adaboost",
    "MultinomialNB": "mnb",
    "MLPClassifier": "mlp",
}

FAMILIES = tuple(_FAMILY_BY_CLASS.values())


def detect_family(model) -> str:
    name = type(model).__name__
    try:
        return _FAMILY_BY_CLASS[name]
    except KeyError:
        raise UnsupportedFamily(
            f"{name} has no interchange mapping; supported estimator classes: "
            f"{', '.join(sorted(_FAMILY_BY_CLASS))}"
        ) from None


def _n_classes(model) -> int:
    try:
        classes = np.asarray(model.classes_)
    except AttributeError as exc:
        raise ExtractionError("estimator is not fitted") from exc
    if not np.array_equal(classes, np.arange(len(classes))):
        raise ExtractionError(
            f"class labels must be consecutive integers 0..K-1, got {classes.tolist()}"
        )
    return len(classes)


def _class_tree(estimator) -> dict:
    """Flatten one classification tree into parallel node arrays.

    scikit-learn already stores children after their parent and sends
    x <= threshold left, matching the interchange descent rule. Leaves get
    feature -1 and the argmax class of their value row.
    """
    t = estimator.tree_
    feature, threshold, left, right, leaf_class = [], [], [], [], []
    for i in range(t.node_count):
        if t.children_left[i] == -1:
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            leaf_class.append(int(np.argmax(t.value[i, 0])))
        else:
            feature.append(int(t.feature[i]))
            threshold.append(float(t.threshold[i]))
            left.append(int(t.children_left[i]))
            right.append(int(t.children_right[i]))
            leaf_class.append(-1)
    return {"feature": feature, "threshold": threshold,
            "left": left, "right": right, "leaf_class": leaf_class}


def _value_tree(estimator) -> dict:
    t = estimator.tree_
    feature, threshold, left, right, leaf_value = [], [], [], [], []
    for i in range(t.node_count):
        if t.children_left[i] == -1:
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
        else:
            feature.append(int(t.feature[i]))
            threshold.append(float(t.threshold[i]))
            left.append(int(t.children_left[i]))
            right.append(int(t.children_right[i]))
        leaf_value.append(float(t.value[i, 0, 0]))
    return {"feature": feature, "threshold": threshold,
            "left": left, "right": right, "leaf_value": leaf_value}


def _params_logreg(model, n_classes):
    w = np.asarray(model.coef_, dtype=float)
    b = np.asarray(model.intercept_, dtype=float)
    return {"weights": w.tolist(), "bias": b.tolist()}


def _params_dtree(model, n_classes):
    return _class_tree(model)


def _params_rforest(model, n_classes):
    return {"trees": [_class_tree(est) for est in model.estimators_]}


def _params_gboost(model, n_classes):
    if n_classes != 2:
        raise ExtractionError("gradient boosting export supports binary models only")
    trees = [est[0] for est in model.estimators_]
    lr = float(model.learning_rate)
    # Recover the initial raw score by subtracting the staged contributions
    # at a probe point; robust to how the init estimator is configured.
    probe = np.zeros((1, model.n_features_in_))
    raw = float(model.decision_function(probe)[0])
    staged = sum(float(t.predict(probe)[0]) for t in trees)
    init_score = raw - lr * staged
    return {"init_score": init_score, "learning_rate": lr,
            "trees": [_value_tree(t) for t in trees]}


def _params_adaboost(model, n_classes):
    stumps = list(model.estimators_)
    alphas = [float(a) for a in model.estimator_weights_[:len(stumps)]]
    if not stumps:
        raise ExtractionError("boosted ensemble has no estimators")
    return {"stumps": [_class_tree(s) for s in stumps], "alphas": alphas}


def _params_mnb(model, n_classes):
    return {"class_log_prior": np.asarray(model.class_log_prior_, float).tolist(),
            "feature_log_prob": np.asarray(model.feature_log_prob_, float).tolist()}


def _params_mlp(model, n_classes):
    if model.activation != "relu":
        raise ExtractionError(
            f"only relu hidden activations are exportable, got {model.activation!r}"
        )
    layers = []
    last = len(model.coefs_) - 1
    for k, (w, b) in enumerate(zip(model.coefs_, model.intercepts_)):
        layers.append({
            "weights": np.asarray(w, float).tolist(),
            "bias": np.asarray(b, float).tolist(),
            "activation": "identity" if k == last else "relu",
        })
    return {"layers": layers}


_EXTRACTORS = {
    "logreg": _params_logreg,
    "dtree": _params_dtree,
    "rforest": _params_rforest,
    "gboost": _params_gboost,
    "adaboost": _params_adaboost,
    "mnb": _params_mnb,
    "mlp": _params_mlp,
}


# --- canonical JSON writing (17 significant digits, stable layout) ---

def _fmt_scalar(v) -> str:
    if isinstance(v, bool):
        raise ExtractionError("booleans are not part of the interchange format")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            raise ExtractionError("non-finite parameter cannot be serialized")
        return format(v, ".17g")
    if isinstance(v, str):
        return json.dumps(v)
    raise ExtractionError(f"unsupported value type {type(v).__name__}")


def _dump(obj, indent: int = 0) -> str:
    pad, pad_in = " " * indent, " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f"{pad_in}{json.dumps(str(k))}: {_dump(v, indent + 2)}"
            for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) for v in seq):
            return "[" + ", ".join(_fmt_scalar(v) for v in seq) + "]"
        items = ",\n".join(pad_in + _dump(v, indent + 2) for v in seq)
        return "[\n" + items + "\n" + pad + "]"
    return _fmt_scalar(obj)


def export_model(model, out: str, family: str | None = None) -> dict:
    """Write the interchange JSON for a fitted estimator.

    Returns a manifest dict (family, paths, shape). `family`, when given,
    must match the detected estimator class.
    """
    detected = detect_family(model)
    if family is not None and family != detected:
        raise ExtractionError(
            f"estimator is {detected!r}, not the requested {family!r}"
        )
    n_classes = _n_classes(model)
    try:
        n_features = int(model.n_features_in_)
    except AttributeError as exc:
        raise ExtractionError("estimator is not fitted") from exc
    params = _EXTRACTORS[detected](model, n_classes)
    doc = {
        "format_version": 1,
        "family": detected,
        "n_classes": n_classes,
        "n_features": n_features,
        "params": params,
    }
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(_dump(doc))
        fh.write("\n")
    return {"family": detected, "out": out,
            "n_classes": n_classes, "n_features": n_features}
