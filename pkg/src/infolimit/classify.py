"""Baseline classifiers and stratified k-fold cross-validation.

These produce the confusion matrices that are audited against the
information limit. Class priors always come from the training fold, which
is what makes the leakage rates move with the class-1 fraction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import expit, log_expit

from .confusion import ConfusionCounts
from .errors import ConvergenceError, InsufficientDataError
from .table import CONTINUOUS, DISCRETE

KINDS = ("gaussian_naive_bayes", "categorical_naive_bayes", "logistic_regression")


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "gaussian_naive_bayes"
    folds: int = 10
    seed: int = 0
    smoothing_alpha: float = 1.0
    l2_strength: float = 1e-4
    variance_floor: float = 1e-9
    max_iter: int = 100
    gradient_tol: float = 1e-6

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown classifier {self.kind!r}; choose from {KINDS}")
        if self.folds < 2:
            raise ValueError("folds must be at least 2")
        if self.smoothing_alpha < 0 or self.l2_strength < 0 or self.variance_floor <= 0:
            raise ValueError("invalid regularisation settings")

    def to_dict(self):
        return asdict(self)


def default_kind(dataset):
    kinds = {v.kind for v in dataset.variables}
    if kinds == {CONTINUOUS}:
        return "gaussian_naive_bayes"
    if kinds == {DISCRETE}:
        return "categorical_naive_bayes"
    return "logistic_regression"


def _check_kind(dataset, kind):
    kinds = {v.kind for v in dataset.variables}
    if kind == "gaussian_naive_bayes" and kinds != {CONTINUOUS}:
        raise ValueError("gaussian_naive_bayes needs all-continuous variables")
    if kind == "categorical_naive_bayes" and kinds != {DISCRETE}:
        raise ValueError("categorical_naive_bayes needs all-discrete variables")


def _decide(log_post1, log_post2):
    # ties go to class 1
    return np.where(log_post1 >= log_post2, 1, 2).astype(np.int8)


class GaussianNaiveBayes:
    def __init__(self, variance_floor=1e-9):
        self.variance_floor = variance_floor

    def fit(self, X, y):
        self.log_prior = np.log([np.mean(y == 1), np.mean(y == 2)])
        self.mean = np.array([X[y == c].mean(axis=0) for c in (1, 2)])
        self.var = np.maximum(np.array([X[y == c].var(axis=0) for c in (1, 2)]), self.variance_floor)
        return self

    def log_posterior(self, X):
        out = []
        for c in range(2):
            ll = -0.5 * (np.log(2 * np.pi * self.var[c]) + (X - self.mean[c]) ** 2 / self.var[c])
            out.append(self.log_prior[c] + ll.sum(axis=1))
        return np.column_stack(out)

    def predict(self, X):
        lp = self.log_posterior(X)
        return _decide(lp[:, 0], lp[:, 1])


class CategoricalNaiveBayes:
    """Laplace-smoothed category frequencies per class and variable."""

    def __init__(self, n_categories, alpha=1.0):
        self.n_categories = list(n_categories)
        self.alpha = alpha

    def fit(self, X, y):
        X = X.astype(int)
        self.log_prior = np.log([np.mean(y == 1), np.mean(y == 2)])
        self.log_lik = []
        for j, k in enumerate(self.n_categories):
            table = np.empty((2, k))
            for c in (1, 2):
                counts = np.bincount(X[y == c, j], minlength=k).astype(float)
                total = counts.sum() + self.alpha * k
                with np.errstate(divide="ignore"):
                    table[c - 1] = np.log(counts + self.alpha) - np.log(total)
            self.log_lik.append(table)
        return self

    def log_posterior(self, X):
        X = X.astype(int)
        out = np.tile(self.log_prior, (X.shape[0], 1))
        for j, table in enumerate(self.log_lik):
            out += table[:, X[:, j]].T
        return out

    def predict(self, X):
        lp = self.log_posterior(X)
        return _decide(lp[:, 0], lp[:, 1])


def logistic_loss_grad(w, Z, s, l2):
    """Mean logistic loss with an L2 penalty on all but the intercept (w[0]).

    ``s`` is +1 for class 1 and -1 for class 2.
    """
    margin = s * (Z @ w)
    loss = -np.mean(log_expit(margin)) + 0.5 * l2 * np.dot(w[1:], w[1:])
    grad = -(Z.T @ (s * expit(-margin))) / Z.shape[0]
    grad[1:] += l2 * w[1:]
    return loss, grad


class LogisticRegression:
    """Penalised maximum likelihood fitted by damped Newton steps.

    Continuous columns are standardised on the training split; discrete
    columns are one-hot encoded over their full category set.
    """

    def __init__(self, kinds, n_categories, l2=1e-4, max_iter=100, tol=1e-6):
        self.kinds = list(kinds)
        self.n_categories = list(n_categories)
        self.l2 = l2
        self.max_iter = max_iter
        self.tol = tol

    def _design(self, X):
        cols = [np.ones((X.shape[0], 1))]
        for j, kind in enumerate(self.kinds):
            if kind == DISCRETE:
                cols.append(np.eye(self.n_categories[j])[X[:, j].astype(int)])
            else:
                cols.append(((X[:, j] - self.center[j]) / self.scale[j])[:, None])
        return np.hstack(cols)

    def fit(self, X, y):
        self.center = X.mean(axis=0)
        sd = X.std(axis=0)
        self.scale = np.where(sd > 0, sd, 1.0)
        Z = self._design(X)
        s = np.where(y == 1, 1.0, -1.0)
        w = np.zeros(Z.shape[1])
        w[0] = math.log(np.mean(y == 1) / np.mean(y == 2))
        ridge = np.full(Z.shape[1], self.l2)
        ridge[0] = 0.0
        loss, grad = logistic_loss_grad(w, Z, s, self.l2)
        for _ in range(self.max_iter):
            gnorm = float(np.linalg.norm(grad))
            if gnorm <= self.tol:
                break
            p = expit(Z @ w)
            H = (Z * (p * (1 - p))[:, None]).T @ Z / Z.shape[0] + np.diag(ridge)
            try:
                step = np.linalg.solve(H, grad)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(H, grad, rcond=None)[0]
            t = 1.0
            while True:
                w_new = w - t * step
                loss_new, grad_new = logistic_loss_grad(w_new, Z, s, self.l2)
                if loss_new <= loss - 1e-4 * t * float(grad @ step) or t < 1e-10:
                    break
                t *= 0.5
            w, loss, grad = w_new, loss_new, grad_new
        else:
            gnorm = float(np.linalg.norm(grad))
            if gnorm > self.tol:
                raise ConvergenceError("logistic regression did not converge", gnorm)
        self.coef = w
        return self

    def predict(self, X):
        z = self._design(X) @ self.coef
        return _decide(z, np.zeros_like(z))


def make_model(spec, dataset):
    _check_kind(dataset, spec.kind)
    ncat = [len(v.categories) for v in dataset.variables]
    if spec.kind == "gaussian_naive_bayes":
        return GaussianNaiveBayes(spec.variance_floor)
    if spec.kind == "categorical_naive_bayes":
        return CategoricalNaiveBayes(ncat, spec.smoothing_alpha)
    return LogisticRegression([v.kind for v in dataset.variables], ncat,
                              spec.l2_strength, spec.max_iter, spec.gradient_tol)


def stratified_folds(labels, folds, seed=0):
    """Fold index per row; each class is dealt round-robin after a shuffle."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    assign = np.empty(labels.shape[0], dtype=int)
    offset = 0
    for c in (1, 2):
        idx = rng.permutation(np.flatnonzero(labels == c))
        assign[idx] = (offset + np.arange(idx.size)) % folds
        offset = (offset + idx.size) % folds
    return assign


def cross_validated_predictions(dataset, spec):
    folds = spec.folds
    smallest = min(dataset.n1, dataset.n2)
    if smallest < 2:
        raise InsufficientDataError("cross-validation needs at least 2 rows per class")
    if smallest < folds:
        warnings.warn(f"smallest class has {smallest} rows; reducing folds from {folds} to {smallest}")
        folds = smallest
    make_model(spec, dataset)  # kind check up front
    assign = stratified_folds(dataset.labels, folds, spec.seed)
    pred = np.zeros(dataset.n, dtype=np.int8)
    X, y = dataset.values, dataset.labels
    for k in range(folds):
        test = assign == k
        model = make_model(spec, dataset).fit(X[~test], y[~test])
        pred[test] = model.predict(X[test])
    return pred, folds


def counts_from_predictions(labels, pred):
    labels = np.asarray(labels)
    return ConfusionCounts(
        n1_true=int(np.sum((labels == 1) & (pred == 1))),
        n1_leak=int(np.sum((labels == 1) & (pred == 2))),
        n2_leak=int(np.sum((labels == 2) & (pred == 1))),
        n2_true=int(np.sum((labels == 2) & (pred == 2))),
    )


def cross_validate(dataset, spec=None):
    spec = spec or ClassifierSpec(default_kind(dataset))
    pred, _ = cross_validated_predictions(dataset, spec)
    return counts_from_predictions(dataset.labels, pred)
