"""Ensemble over binary tool outputs: train a linear classifier, read its
decision rule off as a simplified boolean expression, and measure how
stable that rule is under subsampling.

The default family is logistic regression minimizing mean cross-entropy
with a small L2 penalty on the weights (separable inputs would otherwise
diverge). A squared-hinge "linear-margin" family is available as a
configuration alternative. Both optimizers are deterministic given the
data order, so retraining reproduces identical weights; the seed argument
only feeds subsampling.
"""

from __future__ import annotations

import json
import math
import random
import warnings
from dataclasses import dataclass

import numpy as np

from .boolexpr import BooleanRule, assignments

LOGISTIC = "logistic"
LINEAR_MARGIN = "linear-margin"
FAMILIES = (LOGISTIC, LINEAR_MARGIN)

# enumeration bound for truth-table extraction
MAX_RULE_VARIABLES = 20

# margin assigned to constant models trained on single-class labels
_CONSTANT_BIAS = 25.0


class CapacityError(ValueError):
    """Too many tools to enumerate a truth table."""


class SingleClassWarning(UserWarning):
    pass


@dataclass(frozen=True)
class EnsembleModel:
    tool_order: tuple[str, ...]
    weights: tuple[float, ...]
    bias: float
    family: str = LOGISTIC

    def __post_init__(self):
        if len(self.weights) != len(self.tool_order):
            raise ValueError("one weight per tool required")

    def margin(self, inputs) -> float:
        if len(inputs) != len(self.weights):
            raise ValueError(
                f"expected {len(self.weights)} inputs, got {len(inputs)}"
            )
        return float(
            sum(w * float(bool(x)) for w, x in zip(self.weights, inputs))
            + self.bias
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "tool_order": list(self.tool_order),
                "weights": list(self.weights),
                "bias": self.bias,
                "family": self.family,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "EnsembleModel":
        obj = json.loads(text)
        return cls(
            tool_order=tuple(obj["tool_order"]),
            weights=tuple(float(w) for w in obj["weights"]),
            bias=float(obj["bias"]),
            family=obj.get("family", LOGISTIC),
        )


def predict(model: EnsembleModel, inputs) -> bool:
    """Positive iff the linear margin is strictly greater than zero.

    Equivalent to sigmoid(margin) > 0.5; an exact-boundary margin of zero
    classifies as negative.
    """
    return model.margin(inputs) > 0.0


def _as_arrays(features, labels) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2:
        raise ValueError("features must be a 2-D grid")
    if y.shape != (X.shape[0],):
        raise ValueError("labels length must match feature rows")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError("need at least one row and one column")
    return X, y


def _constant_model(tool_order, k: int, positive: bool, family: str) -> EnsembleModel:
    warnings.warn(
        "labels contain a single class; returning a constant classifier",
        SingleClassWarning,
        stacklevel=3,
    )
    bias = _CONSTANT_BIAS if positive else -_CONSTANT_BIAS
    return EnsembleModel(
        tool_order=tuple(tool_order), weights=(0.0,) * k, bias=bias,
        family=family,
    )


def _fit_logistic(X: np.ndarray, y: np.ndarray, l2: float, tol: float,
                  max_iter: int) -> tuple[np.ndarray, float]:
    # damped Newton on mean cross-entropy + (l2/2)*||w||^2 (bias unpenalized)
    n, k = X.shape
    Z = np.hstack([X, np.ones((n, 1))])
    reg = np.append(np.full(k, l2), 0.0)
    theta = np.zeros(k + 1)

    def objective(t):
        m = Z @ t
        # log(1 + exp(-s)) computed stably
        ce = np.logaddexp(0.0, -m) * y + np.logaddexp(0.0, m) * (1.0 - y)
        return float(ce.mean() + 0.5 * l2 * np.dot(t[:k], t[:k]))

    obj = objective(theta)
    for _ in range(max_iter):
        p = 1.0 / (1.0 + np.exp(-(Z @ theta)))
        grad = Z.T @ (p - y) / n + reg * theta
        if np.linalg.norm(grad) < tol:
            break
        w_diag = np.clip(p * (1.0 - p), 1e-12, None)
        H = (Z.T * w_diag) @ Z / n + np.diag(reg)
        step = np.linalg.solve(H, grad)
        # backtracking keeps the objective monotone on hard inputs
        scale = 1.0
        for _ in range(40):
            candidate = theta - scale * step
            cand_obj = objective(candidate)
            if cand_obj <= obj + 1e-15:
                theta, obj = candidate, cand_obj
                break
            scale *= 0.5
        else:
            break
    return theta[:k], float(theta[k])


def _fit_linear_margin(X: np.ndarray, y: np.ndarray, l2: float, tol: float,
                       max_iter: int) -> tuple[np.ndarray, float]:
    # squared-hinge loss with L2, full-batch gradient descent + backtracking
    n, k = X.shape
    sign = 2.0 * y - 1.0
    Z = np.hstack([X, np.ones((n, 1))])
    reg = np.append(np.full(k, l2), 0.0)
    theta = np.zeros(k + 1)

    def objective(t):
        viol = np.maximum(0.0, 1.0 - sign * (Z @ t))
        return float((viol**2).mean() + 0.5 * l2 * np.dot(t[:k], t[:k]))

    obj = objective(theta)
    for _ in range(max_iter):
        viol = np.maximum(0.0, 1.0 - sign * (Z @ theta))
        grad = -2.0 * Z.T @ (sign * viol) / n + reg * theta
        if np.linalg.norm(grad) < tol:
            break
        scale = 1.0
        improved = False
        for _ in range(50):
            candidate = theta - scale * grad
            cand_obj = objective(candidate)
            if cand_obj < obj - 1e-15:
                theta, obj = candidate, cand_obj
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
    return theta[:k], float(theta[k])


def train_model(
    features,
    labels,
    tool_order,
    *,
    family: str = LOGISTIC,
    l2: float = 1e-3,
    tol: float = 1e-10,
    max_iter: int = 200,
    seed: int | None = None,
) -> EnsembleModel:
    """Fit a linear classifier on a boolean grid.

    Deterministic given the data order; `seed` is accepted for provenance
    only. Single-class labels produce a constant classifier with a warning
    instead of failing.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown model family {family!r}")
    X, y = _as_arrays(features, labels)
    if len(tool_order) != X.shape[1]:
        raise ValueError("tool_order length must match feature columns")
    if y.min() == y.max():
        return _constant_model(tool_order, X.shape[1], bool(y[0]), family)
    fit = _fit_logistic if family == LOGISTIC else _fit_linear_margin
    w, b = fit(X, y, l2, tol, max_iter)
    return EnsembleModel(
        tool_order=tuple(tool_order),
        weights=tuple(float(v) for v in w),
        bias=b,
        family=family,
    )


def train_logistic(features, labels, tool_order, *, seed: int | None = None,
                   l2: float = 1e-3) -> EnsembleModel:
    return train_model(features, labels, tool_order, family=LOGISTIC,
                       seed=seed, l2=l2)


def extract_boolean_rule(model: EnsembleModel) -> BooleanRule:
    """Enumerate the model over every tool-output combination and simplify."""
    k = len(model.tool_order)
    if k > MAX_RULE_VARIABLES:
        raise CapacityError(
            f"{k} tools exceed the {MAX_RULE_VARIABLES}-variable enumeration bound"
        )
    table = tuple(predict(model, inputs) for inputs in assignments(k))
    return BooleanRule.from_truth_table(table, model.tool_order)


def holdout_split(n: int, test_fraction: float, seed: int) -> tuple[list[int], list[int]]:
    """Disjoint train/test row indices for held-out evaluation.

    Same-set training is the default reproduction mode; this exposes the
    alternative without imposing it.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    if n < 2:
        raise ValueError("need at least two rows to split")
    n_test = max(1, math.floor(test_fraction * n))
    if n_test >= n:
        n_test = n - 1
    rng = random.Random(seed)
    test = sorted(rng.sample(range(n), n_test))
    test_set = set(test)
    train = [i for i in range(n) if i not in test_set]
    return train, test


@dataclass(frozen=True)
class StabilityReport:
    trials: int
    fraction: float
    percent_same: float | None
    reference_rule: BooleanRule

    def __post_init__(self):
        if self.trials > 0 and self.percent_same is None:
            raise ValueError("percent_same required when trials were run")


def stability_analysis(
    features,
    labels,
    tool_order,
    *,
    fraction: float = 0.8,
    trials: int = 100,
    seed: int = 0,
    family: str = LOGISTIC,
    l2: float = 1e-3,
) -> StabilityReport:
    """Retrain on random subsamples and report how often the extracted
    rule matches the full-data rule's truth table."""
    X, y = _as_arrays(features, labels)
    n, k = X.shape
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    m = math.floor(fraction * n)
    if m < k + 1:
        raise ValueError(
            f"subsample of {m} rows cannot fit {k} weights plus bias"
        )
    reference = extract_boolean_rule(
        train_model(X, y, tool_order, family=family, l2=l2)
    )
    if trials == 0:
        return StabilityReport(
            trials=0, fraction=fraction, percent_same=None,
            reference_rule=reference,
        )
    master = random.Random(seed)
    trial_seeds = [master.randrange(2**63) for _ in range(trials)]
    same = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SingleClassWarning)
        for trial_seed in trial_seeds:
            idx = random.Random(trial_seed).sample(range(n), m)
            sub_model = train_model(
                X[idx], y[idx], tool_order, family=family, l2=l2
            )
            rule = extract_boolean_rule(sub_model)
            if rule.truth_table == reference.truth_table:
                same += 1
    return StabilityReport(
        trials=trials,
        fraction=fraction,
        percent_same=100.0 * same / trials,
        reference_rule=reference,
    )
