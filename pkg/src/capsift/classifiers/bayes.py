"""Gaussian naive Bayes with variance smoothing."""

from __future__ import annotations

import numpy as np

from .base import GAUSSIAN_NB, AlgorithmSpec, TrainedModel, register_algorithm


class GaussianNbModel(TrainedModel):
    """Per-class feature means/variances and log-priors; scores are the
    normalized posterior probabilities."""

    algorithm = GAUSSIAN_NB

    def __init__(self, spec, classes, means, variances, log_priors):
        super().__init__(spec, classes, None, means.shape[1])
        self.means = means
        self.variances = variances
        self.log_priors = log_priors

    def _scores(self, Z: np.ndarray) -> np.ndarray:
        k = len(self.classes)
        loglik = np.empty((Z.shape[0], k))
        for c in range(k):
            var = self.variances[c]
            diff = Z - self.means[c]
            loglik[:, c] = self.log_priors[c] - 0.5 * (
                np.log(2.0 * np.pi * var) + diff ** 2 / var
            ).sum(axis=1)
        shifted = loglik - loglik.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        return exp / exp.sum(axis=1, keepdims=True)

    def _arrays(self):
        return {"means": self.means, "variances": self.variances, "log_priors": self.log_priors}

    @classmethod
    def _restore(cls, spec, classes, scaler, n_features, scalars, arrays):
        return cls(spec, classes, arrays["means"], arrays["variances"], arrays["log_priors"])


def _train_gaussian_nb(spec: AlgorithmSpec, X, y_codes, classes):
    params = spec.resolved()
    smoothing = float(params["var_smoothing"])
    n, d = X.shape
    k = len(classes)
    # smoothing is relative to the largest overall feature variance; fall
    # back to the raw value when all features are constant
    max_var = float(X.var(axis=0).max())
    eps = smoothing * max_var if max_var > 0 else smoothing
    means = np.empty((k, d))
    variances = np.empty((k, d))
    log_priors = np.empty(k)
    for c in range(k):
        rows = X[y_codes == c]
        means[c] = rows.mean(axis=0)
        variances[c] = rows.var(axis=0) + eps
        log_priors[c] = np.log(len(rows) / n)
    return GaussianNbModel(spec, classes, means, variances, log_priors)


register_algorithm(GAUSSIAN_NB, _train_gaussian_nb, GaussianNbModel)
