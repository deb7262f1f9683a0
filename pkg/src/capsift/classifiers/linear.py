"""Linear classifiers trained by (sub)gradient descent: multinomial logistic
regression and a one-vs-rest hinge-loss SVM."""

from __future__ import annotations

import numpy as np

from .base import (
    LINEAR_SVM, LOGISTIC_REGRESSION, AlgorithmSpec, TrainedModel,
    register_algorithm, standardize_fit,
)

_MIN_STEP = 1e-12


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def cross_entropy_loss_and_grad(weights, bias, X, onehot, l2):
    """Mean softmax cross-entropy with an 0.5 * l2 * ||W||^2 penalty.

    Returns (loss, grad_weights, grad_bias). The bias is not penalized.
    """
    n = X.shape[0]
    logits = X @ weights.T + bias
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    log_probs = shifted - np.log(exp.sum(axis=1, keepdims=True))
    probs = np.exp(log_probs)
    loss = -float((onehot * log_probs).sum()) / n + 0.5 * l2 * float((weights ** 2).sum())
    delta = probs - onehot
    grad_w = delta.T @ X / n + l2 * weights
    grad_b = delta.mean(axis=0)
    return loss, grad_w, grad_b


class LogisticRegressionModel(TrainedModel):
    """Multinomial softmax classifier; scores are class probabilities."""

    algorithm = LOGISTIC_REGRESSION

    def __init__(self, spec, classes, scaler, weights, bias, loss_history=()):
        super().__init__(spec, classes, scaler, weights.shape[1])
        self.weights = weights
        self.bias = bias
        self.loss_history = tuple(loss_history)

    def _scores(self, Z: np.ndarray) -> np.ndarray:
        return softmax(Z @ self.weights.T + self.bias)

    def _arrays(self):
        return {"weights": self.weights, "bias": self.bias}

    @classmethod
    def _restore(cls, spec, classes, scaler, n_features, scalars, arrays):
        return cls(spec, classes, scaler, arrays["weights"], arrays["bias"])


def _train_logistic_regression(spec: AlgorithmSpec, X, y_codes, classes):
    """Full-batch gradient descent from zero weights, halving the step
    whenever a proposed update would increase the loss (so the recorded loss
    history is non-increasing). The final iterate is returned regardless of
    convergence."""
    params = spec.resolved()
    lr = float(params["learning_rate"])
    l2 = float(params["l2"])
    iterations = int(params["iterations"])
    scaler = standardize_fit(X)
    Z = scaler.transform(X)
    n, d = Z.shape
    k = len(classes)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), y_codes] = 1.0

    W = np.zeros((k, d))
    b = np.zeros(k)
    loss, gw, gb = cross_entropy_loss_and_grad(W, b, Z, onehot, l2)
    history = [loss]
    for _ in range(iterations):
        while True:
            W_new = W - lr * gw
            b_new = b - lr * gb
            loss_new, gw_new, gb_new = cross_entropy_loss_and_grad(W_new, b_new, Z, onehot, l2)
            if loss_new <= loss:
                break
            if lr <= _MIN_STEP:
                loss_new = None
                break
            lr /= 2.0
        if loss_new is None:
            break
        W, b, loss, gw, gb = W_new, b_new, loss_new, gw_new, gb_new
        history.append(loss)
    return LogisticRegressionModel(spec, classes, scaler, W, b, history)


class LinearSvmModel(TrainedModel):
    """One hinge-loss linear model per class; scores are the raw margins."""

    algorithm = LINEAR_SVM

    def __init__(self, spec, classes, scaler, weights, bias):
        super().__init__(spec, classes, scaler, weights.shape[1])
        self.weights = weights
        self.bias = bias

    def _scores(self, Z: np.ndarray) -> np.ndarray:
        return Z @ self.weights.T + self.bias

    def _arrays(self):
        return {"weights": self.weights, "bias": self.bias}

    @classmethod
    def _restore(cls, spec, classes, scaler, n_features, scalars, arrays):
        return cls(spec, classes, scaler, arrays["weights"], arrays["bias"])


def _train_linear_svm(spec: AlgorithmSpec, X, y_codes, classes):
    """Subgradient descent on 0.5*||w||^2 + c * mean(hinge), one binary
    one-vs-rest problem per class."""
    params = spec.resolved()
    lr = float(params["learning_rate"])
    c = float(params["c"])
    iterations = int(params["iterations"])
    scaler = standardize_fit(X)
    Z = scaler.transform(X)
    n, d = Z.shape
    k = len(classes)
    W = np.zeros((k, d))
    b = np.zeros(k)
    for cls_idx in range(k):
        t = np.where(y_codes == cls_idx, 1.0, -1.0)
        w = np.zeros(d)
        w0 = 0.0
        for _ in range(iterations):
            margins = t * (Z @ w + w0)
            viol = margins < 1.0
            grad_w = w - (c / n) * (t[viol] @ Z[viol])
            grad_b = -(c / n) * t[viol].sum()
            w = w - lr * grad_w
            w0 = w0 - lr * grad_b
        W[cls_idx] = w
        b[cls_idx] = w0
    return LinearSvmModel(spec, classes, scaler, W, b)


register_algorithm(LOGISTIC_REGRESSION, _train_logistic_regression, LogisticRegressionModel)
register_algorithm(LINEAR_SVM, _train_linear_svm, LinearSvmModel)
