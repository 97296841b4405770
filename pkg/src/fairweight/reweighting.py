"""Example reweighting driven by per-group multipliers.

Positive examples of group k get weight wt/(1+wt) with wt = exp(sum of member
multipliers); negative examples get the complement. Multipliers are learned by
repeatedly measuring constraint violations of the current model, stepping the
multipliers against them, and retraining from scratch on the new weights.
Equalized odds keeps separate multiplier blocks for positively and negatively
labelled points, the negative block entering the exponent with a minus sign.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from .classifier import ModelParams, TrainConfig, predict_proba, train_weighted
from .constraints import ConstraintSet, FairnessNotion, violation
from .data import LabeledDataset

EXPONENT_CLAMP = 50.0


@dataclass(frozen=True)
class Multipliers:
    """Per-group coefficients; ``lam_fp`` is present only for equalized odds,
    in which case ``lam`` holds the true-positive block."""

    lam: np.ndarray
    lam_fp: np.ndarray | None = None

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=np.float64)
        object.__setattr__(self, "lam", lam)
        if lam.ndim != 1:
            raise ValueError("multipliers must form a vector")
        if not np.isfinite(lam).all():
            raise ValueError("multipliers must be finite")
        if self.lam_fp is not None:
            lam_fp = np.asarray(self.lam_fp, dtype=np.float64)
            object.__setattr__(self, "lam_fp", lam_fp)
            if lam_fp.shape != lam.shape:
                raise ValueError("lambda_fp must match lambda_tp in length")
            if not np.isfinite(lam_fp).all():
                raise ValueError("multipliers must be finite")

    @property
    def is_equalized_odds(self) -> bool:
        return self.lam_fp is not None

    @classmethod
    def zeros(cls, group_count: int, equalized_odds: bool = False) -> "Multipliers":
        lam = np.zeros(group_count)
        return cls(lam=lam, lam_fp=np.zeros(group_count) if equalized_odds else None)

    def to_json(self) -> dict:
        if self.is_equalized_odds:
            return {"lambda_tp": self.lam.tolist(), "lambda_fp": self.lam_fp.tolist()}
        return {"lambda": self.lam.tolist()}


@dataclass(frozen=True)
class ReweighConfig:
    eta: float = 1.0
    loops: int = 100

    def __post_init__(self):
        if not self.eta > 0.0:
            raise ValueError("eta must be positive")
        if self.loops < 0:
            raise ValueError("loops must be non-negative")


@dataclass(frozen=True)
class WeightAssignment:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if not np.isfinite(w).all():
            raise ValueError("weights must be finite")
        if (w <= 0.0).any() or (w >= 1.0).any():
            raise ValueError("weights must lie strictly inside (0, 1)")


def _lam_vector(lam) -> np.ndarray:
    if isinstance(lam, Multipliers):
        return lam.lam
    return np.asarray(lam, dtype=np.float64)


def _positive_weight(exponent: np.ndarray) -> np.ndarray:
    # wt/(1+wt) for wt = exp(exponent); exponent clamped to +-50 against
    # overflow, and the weight nudged off 0/1 so it stays representable
    # strictly inside the unit interval
    w = expit(np.clip(exponent, -EXPONENT_CLAMP, EXPONENT_CLAMP))
    return np.clip(w, 1e-15, 1.0 - 1e-15)


def example_weight(lam, membership, label: int) -> float:
    """Weight of one example under the single-block multipliers."""
    s = float(_lam_vector(lam) @ np.asarray(membership, dtype=np.float64))
    w1 = float(_positive_weight(np.float64(s)))
    return w1 if label == 1 else 1.0 - w1


def example_weight_eqodds(lam: Multipliers, membership, label: int) -> float:
    """Weight of one example under paired TP/FP multipliers; only the block
    matching the observed label is read, and the FP exponent is negated."""
    if not lam.is_equalized_odds:
        raise ValueError("equalized-odds weights need paired TP/FP multipliers")
    membership = np.asarray(membership, dtype=np.float64)
    if label == 1:
        return float(_positive_weight(np.float64(lam.lam @ membership)))
    return float(_positive_weight(np.float64(-(lam.lam_fp @ membership))))


def assignment_weights(lam: Multipliers, ds: LabeledDataset) -> WeightAssignment:
    """Vectorized per-example weights for a whole dataset."""
    groups = ds.groups.astype(np.float64)
    positive = ds.labels == 1
    if lam.is_equalized_odds:
        w_pos = _positive_weight(groups @ lam.lam)
        w_neg = _positive_weight(-(groups @ lam.lam_fp))
        weights = np.where(positive, w_pos, w_neg)
    else:
        w_pos = _positive_weight(groups @ lam.lam)
        weights = np.where(positive, w_pos, 1.0 - w_pos)
    return WeightAssignment(weights=weights)


def update_multipliers(lam: Multipliers, delta: np.ndarray, eta: float) -> Multipliers:
    """One step lambda_k <- lambda_k - eta * delta_k (per block for equalized odds)."""
    delta = np.asarray(delta, dtype=np.float64)
    k = lam.lam.shape[0]
    if lam.is_equalized_odds:
        if delta.shape != (2 * k,):
            raise ValueError(f"expected a violation vector of length {2 * k}")
        return Multipliers(lam=lam.lam - eta * delta[:k], lam_fp=lam.lam_fp - eta * delta[k:])
    if delta.shape != (k,):
        raise ValueError(f"expected a violation vector of length {k}")
    return Multipliers(lam=lam.lam - eta * delta)


class FitResult(NamedTuple):
    model: ModelParams
    multipliers: Multipliers
    trace: list


def fit(
    ds: LabeledDataset,
    cs: ConstraintSet,
    rcfg: ReweighConfig | None = None,
    tcfg: TrainConfig | None = None,
) -> FitResult:
    """Learn multipliers and a classifier by the iterative reweighting loop.

    Starts from zero multipliers and uniform weights; each loop measures the
    violations of the current model's probabilistic scores, steps the
    multipliers, recomputes all weights, and retrains from zero initialization.
    For disparate impact the caller must mask protected feature columns first.

    The trace holds loops+1 violation vectors: the unconstrained model's and
    one per retrain, so trace[-1] describes the returned model.
    """
    rcfg = rcfg or ReweighConfig()
    tcfg = tcfg or TrainConfig()
    if cs.group_count != ds.num_groups:
        raise ValueError("constraint set and dataset disagree on group count")
    equalized = cs.notion is FairnessNotion.EQUALIZED_ODDS
    lam = Multipliers.zeros(ds.num_groups, equalized_odds=equalized)
    try:
        model = train_weighted(ds, np.ones(ds.n), tcfg)
    except RuntimeError as err:
        raise RuntimeError(f"initial training failed: {err}") from err
    trace = [violation(cs, ds, predict_proba(model, ds.features))]
    for loop in range(1, rcfg.loops + 1):
        lam = update_multipliers(lam, trace[-1], rcfg.eta)
        weights = assignment_weights(lam, ds)
        try:
            model = train_weighted(ds, weights.weights, tcfg)
        except RuntimeError as err:
            raise RuntimeError(f"training failed at loop {loop}: {err}") from err
        trace.append(violation(cs, ds, predict_proba(model, ds.features)))
    return FitResult(model=model, multipliers=lam, trace=trace)


def sampling_mask(lam: Multipliers, ds: LabeledDataset, seed: int) -> np.ndarray:
    """Accept/reject alternative to weighting: draw an auxiliary label with
    positive probability equal to the example's positive-label weight and keep
    the example iff the draw matches its observed label."""
    if lam.is_equalized_odds:
        raise ValueError("sampling is defined only for single-block multipliers")
    p_one = _positive_weight(ds.groups.astype(np.float64) @ lam.lam)
    draws = np.random.default_rng(seed).random(ds.n)
    auxiliary = (draws < p_one).astype(np.int64)
    return (auxiliary == ds.labels).astype(np.int64)
