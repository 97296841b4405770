"""Synthetic tasks with known true labels and a controlled, closed-form label
bias injected on top of them.

The injected bias tilts the true positive-probability of an example by
exp(-a) with a = sum over member groups of lambda_k * c_k(x, 1), then
renormalizes over the two outcomes. Inverting the tilt (same multipliers,
positive sign) recovers the true scores exactly, which makes these tasks an
oracle for the reweighting machinery.
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.special import expit

from .constraints import FairnessNotion
from .data import GroupSpec, LabeledDataset

EXPONENT_CLAMP = 50.0  # mirrors the reweighting clamp so round trips stay exact


@dataclass(frozen=True)
class BiasSpec:
    """Bias-injection parameters; only label-independent (demographic-parity
    style) constraints are usable for generation."""

    lambda_star: np.ndarray
    seed: int
    notion: FairnessNotion = FairnessNotion.DEMOGRAPHIC_PARITY

    def __post_init__(self):
        lam = np.asarray(self.lambda_star, dtype=np.float64)
        object.__setattr__(self, "lambda_star", lam)
        if lam.ndim != 1 or not np.isfinite(lam).all():
            raise ValueError("lambda_star must be a finite vector")
        if self.notion is not FairnessNotion.DEMOGRAPHIC_PARITY:
            raise ValueError("bias generation supports demographic parity only")


@dataclass(frozen=True)
class SyntheticTask:
    """Generated data: ``dataset`` carries the biased labels, while the true
    scores and a reference draw of true labels ride along for evaluation."""

    dataset: LabeledDataset
    true_scores: np.ndarray
    true_labels: np.ndarray
    lambda_star: np.ndarray
    group_fraction: float

    def __post_init__(self):
        if len(self.true_scores) != self.dataset.n or len(self.true_labels) != self.dataset.n:
            raise ValueError("true score/label lengths must match the dataset")
        if ((self.true_scores < 0) | (self.true_scores > 1)).any():
            raise ValueError("true scores must lie in [0, 1]")

    @property
    def constraint_at_one(self) -> np.ndarray:
        """Per-group c_k(x, 1) for a member, from the population group rate."""
        k = len(self.lambda_star)
        return np.full(k, 1.0 / self.group_fraction - 1.0)


def _clamped_exponent(lam, membership, c) -> np.ndarray:
    """a = sum over member groups of lambda_k * c_k, clamped to +-50.

    ``membership`` may be one K-vector or an (n, K) matrix; ``c`` is a scalar
    or per-group vector of constraint values.
    """
    lam = np.asarray(lam, dtype=np.float64)
    membership = np.asarray(membership, dtype=np.float64)
    c = np.broadcast_to(np.asarray(c, dtype=np.float64), lam.shape)
    raw = membership @ (lam * c)
    return np.clip(raw, -EXPONENT_CLAMP, EXPONENT_CLAMP)


def bias_score(true_score, lam, membership, c1, c0=0.0):
    """Biased positive probability for an example with the given true score.

    ``c1``/``c0`` are the constraint values at the positive/negative outcome
    (scalars or per-group vectors); only member groups contribute.
    """
    true_score = np.asarray(true_score, dtype=np.float64)
    a1 = _clamped_exponent(lam, membership, c1)
    a0 = _clamped_exponent(lam, membership, c0)
    positive_mass = true_score * np.exp(-a1)
    negative_mass = (1.0 - true_score) * np.exp(-a0)
    result = positive_mass / (positive_mass + negative_mass)
    return float(result) if result.ndim == 0 else result


def recover_score(biased_score, lam, membership, c1, c0=0.0):
    """Invert the bias tilt: apply exp(+a) to the positive outcome and
    renormalize. Exact inverse of bias_score for matching multipliers."""
    biased_score = np.asarray(biased_score, dtype=np.float64)
    a1 = _clamped_exponent(lam, membership, c1)
    a0 = _clamped_exponent(lam, membership, c0)
    positive_mass = biased_score * np.exp(a1)
    negative_mass = (1.0 - biased_score) * np.exp(a0)
    result = positive_mass / (positive_mass + negative_mass)
    return float(result) if result.ndim == 0 else result


def generate(
    n: int,
    d: int,
    group_fraction: float,
    lambda_star,
    seed: int,
    max_retries: int = 10,
) -> SyntheticTask:
    """Draw a synthetic task: d standard-normal feature columns, Bernoulli
    group memberships, logistic true scores over the normal block, and labels
    drawn from the biased scores.

    Membership indicators are appended to the feature matrix (named after the
    groups) so a trained classifier can express, and therefore inherit, the
    injected group bias; the true scores do not depend on them. Fully
    determined by the seed. If a drawn group column is degenerate (or either
    label vector single-class), the whole draw is retried with the seed
    incremented, up to ``max_retries`` times.
    """
    if not 0.0 < group_fraction < 1.0:
        raise ValueError("group_fraction must be strictly between 0 and 1")
    if n < 2 or d < 1:
        raise ValueError("need n >= 2 and d >= 1")
    lambda_star = np.asarray(lambda_star, dtype=np.float64)
    k = lambda_star.shape[0]
    c1 = 1.0 / group_fraction - 1.0  # population-rate demographic-parity value

    for attempt in range(max_retries):
        rng = np.random.default_rng(seed + attempt)
        groups = (rng.random((n, k)) < group_fraction).astype(np.int64)
        beta = 1.5 * rng.standard_normal(d) / np.sqrt(d)
        normals = rng.standard_normal((n, d))
        true_scores = expit(normals @ beta)
        biased_scores = bias_score(true_scores, lambda_star, groups, c1)
        biased_labels = (rng.random(n) < biased_scores).astype(np.int64)
        true_labels = (rng.random(n) < true_scores).astype(np.int64)
        counts = groups.sum(axis=0)
        degenerate = (
            (counts == 0).any()
            or (counts == n).any()
            or biased_labels.min() == biased_labels.max()
            or true_labels.min() == true_labels.max()
        )
        if degenerate:
            continue
        group_names = [f"group_{i}" for i in range(k)]
        dataset = LabeledDataset(
            features=np.column_stack([normals, groups.astype(np.float64)]),
            labels=biased_labels,
            groups=groups,
            feature_names=[f"x{j}" for j in range(d)] + group_names,
            group_names=group_names,
        )
        return SyntheticTask(
            dataset=dataset,
            true_scores=true_scores,
            true_labels=true_labels,
            lambda_star=lambda_star,
            group_fraction=group_fraction,
        )
    raise RuntimeError(f"degenerate draws for {max_retries} consecutive seeds from {seed}")


def debias_check(task: SyntheticTask, lam) -> float:
    """Max absolute error of the closed-form inversion applied with ``lam`` to
    the task's analytic biased scores. Zero (to float precision) iff ``lam``
    matches the generation multipliers."""
    c1 = task.constraint_at_one
    groups = task.dataset.groups
    biased = bias_score(task.true_scores, task.lambda_star, groups, c1)
    recovered = recover_score(biased, lam, groups, c1)
    return float(np.abs(recovered - task.true_scores).max())


def task_to_csv(task: SyntheticTask, path) -> None:
    """Write the task in the standard CSV schema: the feature columns (group
    indicator columns included, as 0/1 integers) plus a 0/1 ``label`` column."""
    frame = pd.DataFrame(task.dataset.features, columns=task.dataset.feature_names)
    for name in task.dataset.group_names:
        frame[name] = frame[name].astype(np.int64)
    frame["label"] = task.dataset.labels
    frame.to_csv(path, index=False)


def csv_group_specs(task: SyntheticTask) -> list[GroupSpec]:
    """Group specs re-deriving the memberships from a CSV written by
    task_to_csv."""
    return [
        GroupSpec(name=name, column=name, rule="categorical-equals", value="1")
        for name in task.dataset.group_names
    ]
