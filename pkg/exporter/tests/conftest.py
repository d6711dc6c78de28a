import numpy as np
import pytest
from sklearn.ensemble import (
    AdaBoostClassifier,
    GradientBoostingClassifier,
    RandomForestClassifier,
)
from sklearn.linear_model import LogisticRegression
from sklearn.naive_bayes import MultinomialNB
from sklearn.neural_network import MLPClassifier
from sklearn.tree import DecisionTreeClassifier


@pytest.fixture(scope="session")
def dataset():
    # nonnegative features so the naive Bayes fit is valid too
    rng = np.random.default_rng(42)
    X = rng.uniform(0.0, 4.0, size=(240, 8))
    y = (X[:, 0] + 0.5 * X[:, 1] - X[:, 2] > 1.0).astype(int)
    assert 0 < y.sum() < len(y)
    return X, y


@pytest.fixture(scope="session")
def fitted(dataset):
    X, y = dataset
    return {
        "logreg": LogisticRegression(max_iter=1000).fit(X, y),
        "dtree": DecisionTreeClassifier(random_state=0).fit(X, y),
        "rforest": RandomForestClassifier(n_estimators=30, random_state=0).fit(X, y),
        "gboost": GradientBoostingClassifier(n_estimators=40, random_state=0).fit(X, y),
        "adaboost": AdaBoostClassifier(n_estimators=25, random_state=0).fit(X, y),
        "mnb": MultinomialNB().fit(X, y),
        "mlp": MLPClassifier(hidden_layer_sizes=(16,), activation="relu",
                             max_iter=500, random_state=0).fit(X, y),
    }
