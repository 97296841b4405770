"""Weighted L2-regularized logistic regression, trained by deterministic
full-batch gradient descent from zero initialization.

The objective is

    (1 / sum w) * sum_i w_i * logloss(sigmoid(beta . x_i + b), y_i)
        + l2_strength * ||beta||^2

with the intercept excluded from the penalty. When ``l2_strength`` is left
unset it defaults to 0.5 / n, the unit-penalty equivalent scaled by dataset
size, so weight rescaling never changes the optimum.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import LabeledDataset


@dataclass(frozen=True)
class TrainConfig:
    l2_strength: float | None = None  # None -> 0.5 / n at train time
    max_iterations: int = 5000
    step_size: float = 0.5
    gradient_tolerance: float = 1e-7

    def __post_init__(self):
        if self.l2_strength is not None and not self.l2_strength >= 0.0:
            raise ValueError("l2_strength must be non-negative")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not self.step_size > 0.0:
            raise ValueError("step_size must be positive")
        if not self.gradient_tolerance > 0.0:
            raise ValueError("gradient_tolerance must be positive")

    def resolve_l2(self, n: int) -> float:
        return 0.5 / n if self.l2_strength is None else self.l2_strength


@dataclass(frozen=True)
class ModelParams:
    coefficients: np.ndarray
    intercept: float

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=np.float64)
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        if coef.ndim != 1:
            raise ValueError("coefficients must be a vector")
        if not (np.isfinite(coef).all() and np.isfinite(self.intercept)):
            raise ValueError("model parameters must be finite")

    def to_json(self) -> dict:
        return {"coefficients": self.coefficients.tolist(), "intercept": self.intercept}

    @classmethod
    def from_json(cls, payload: dict) -> "ModelParams":
        return cls(
            coefficients=np.asarray(payload["coefficients"], dtype=np.float64),
            intercept=float(payload["intercept"]),
        )


def _check_weights(weights: np.ndarray, n: int) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (n,):
        raise ValueError(f"weights must have shape ({n},)")
    if not np.isfinite(w).all():
        raise ValueError("weights must be finite")
    if (w < 0).any():
        raise ValueError("weights must be non-negative")
    total = w.sum()
    if total <= 0.0:
        raise ValueError("weights must not be all zero")
    return w / total


def objective_value(m: ModelParams, ds: LabeledDataset, weights, cfg: TrainConfig) -> float:
    """Normalized weighted log-loss plus the L2 penalty at the given parameters."""
    wn = _check_weights(weights, ds.n)
    l2 = cfg.resolve_l2(ds.n)
    z = ds.features @ m.coefficients + m.intercept
    losses = np.logaddexp(0.0, z) - ds.labels * z
    return float(wn @ losses + l2 * (m.coefficients @ m.coefficients))


def weighted_gradient(m: ModelParams, ds: LabeledDataset, weights, cfg: TrainConfig) -> np.ndarray:
    """Analytic objective gradient, coefficients first and intercept last.

    Exposed for verification against finite differences.
    """
    wn = _check_weights(weights, ds.n)
    l2 = cfg.resolve_l2(ds.n)
    z = ds.features @ m.coefficients + m.intercept
    residual = wn * (expit(z) - ds.labels)
    grad_coef = ds.features.T @ residual + 2.0 * l2 * m.coefficients
    return np.append(grad_coef, residual.sum())


def gradient_descent_trace(
    ds: LabeledDataset, weights, cfg: TrainConfig
) -> tuple[ModelParams, np.ndarray]:
    """Run the descent and also return the objective value at every iterate
    (initial point included). Exposed for verification of monotone descent."""
    wn = _check_weights(weights, ds.n)
    l2 = cfg.resolve_l2(ds.n)
    X = ds.features
    y = ds.labels.astype(np.float64)
    coef = np.zeros(ds.num_features)
    intercept = 0.0
    losses = []
    for iteration in range(cfg.max_iterations + 1):
        z = X @ coef + intercept
        loss = float(wn @ (np.logaddexp(0.0, z) - y * z) + l2 * (coef @ coef))
        if not np.isfinite(loss):
            raise RuntimeError(f"training diverged: non-finite loss at iteration {iteration}")
        losses.append(loss)
        residual = wn * (expit(z) - y)
        grad_coef = X.T @ residual + 2.0 * l2 * coef
        grad_intercept = residual.sum()
        grad_inf = max(np.abs(grad_coef).max(), abs(grad_intercept))
        if grad_inf <= cfg.gradient_tolerance or iteration == cfg.max_iterations:
            break
        coef = coef - cfg.step_size * grad_coef
        intercept = intercept - cfg.step_size * grad_intercept
    return ModelParams(coefficients=coef, intercept=intercept), np.asarray(losses)


def train_weighted(ds: LabeledDataset, weights, cfg: TrainConfig | None = None) -> ModelParams:
    """Train on the weighted objective; deterministic for fixed inputs."""
    model, _ = gradient_descent_trace(ds, weights, cfg or TrainConfig())
    return model


def predict_proba(m: ModelParams, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != m.coefficients.shape[0]:
        raise ValueError(
            f"feature matrix must have {m.coefficients.shape[0]} columns, "
            f"got shape {features.shape}"
        )
    # keep probabilities strictly inside (0, 1) even when the sigmoid saturates
    return np.clip(expit(features @ m.coefficients + m.intercept), 1e-15, 1.0 - 1e-15)


def predict_label(m: ModelParams, features: np.ndarray) -> np.ndarray:
    """Hard predictions; probability exactly 0.5 maps to 1."""
    return (predict_proba(m, features) >= 0.5).astype(np.int64)
