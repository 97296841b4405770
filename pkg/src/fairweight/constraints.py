"""Fairness constraint functions, empirical base rates and violation evaluation.

All four notions use per-example constraint values that vanish for the negative
prediction, so a classifier's violation for group k reduces to the mean of
score(x) * c_k(x, 1) over the dataset. Where a constraint depends on the
unobserved true label we substitute the observed label.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .data import LabeledDataset


class FairnessNotion(str, Enum):
    DEMOGRAPHIC_PARITY = "demographic_parity"
    DISPARATE_IMPACT = "disparate_impact"
    EQUAL_OPPORTUNITY = "equal_opportunity"
    EQUALIZED_ODDS = "equalized_odds"


@dataclass(frozen=True)
class BaseRates:
    """Empirical rates: z[k] group frequency, p_x positive-label rate,
    p_g[k] positive-and-in-group rate."""

    z: np.ndarray
    p_x: float
    p_g: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.float64)
        p_g = np.asarray(self.p_g, dtype=np.float64)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "p_g", p_g)
        if z.shape != p_g.shape or z.ndim != 1:
            raise ValueError("z and p_g must be 1-D vectors of equal length")
        if not 0.0 < self.p_x < 1.0:
            raise ValueError(f"positive-label rate is degenerate: p_x={self.p_x}")
        for k in range(len(z)):
            if not 0.0 < z[k] < 1.0:
                raise ValueError(f"group {k} frequency is degenerate: z={z[k]}")
            if not 0.0 <= p_g[k] <= z[k]:
                raise ValueError(f"group {k}: p_g={p_g[k]} outside [0, z={z[k]}]")

    @property
    def group_count(self) -> int:
        return len(self.z)


@dataclass(frozen=True)
class ConstraintSet:
    notion: FairnessNotion
    rates: BaseRates

    def __post_init__(self):
        if self.notion in (FairnessNotion.EQUAL_OPPORTUNITY, FairnessNotion.EQUALIZED_ODDS):
            for k in range(self.rates.group_count):
                if self.rates.p_g[k] == 0.0:
                    raise ValueError(
                        f"group {k} has no positive examples; "
                        f"{self.notion.value} constraint undefined"
                    )
        if self.notion is FairnessNotion.EQUALIZED_ODDS:
            for k in range(self.rates.group_count):
                if self.rates.p_g[k] == self.rates.z[k]:
                    raise ValueError(
                        f"group {k} has no negative examples; "
                        "equalized-odds FP constraint undefined"
                    )

    @property
    def group_count(self) -> int:
        return self.rates.group_count


def base_rates(ds: LabeledDataset) -> BaseRates:
    """Empirical base rates of a dataset; errors on degenerate labels or groups."""
    p_x = float(ds.labels.mean())
    if p_x in (0.0, 1.0):
        raise ValueError(f"labels are degenerate: p_x={p_x}")
    z = ds.groups.mean(axis=0)
    for k, name in enumerate(ds.group_names):
        if z[k] in (0.0, 1.0):
            raise ValueError(f"group {name!r} is degenerate: z={z[k]}")
    p_g = (ds.groups * ds.labels[:, None]).mean(axis=0)
    return BaseRates(z=z, p_x=p_x, p_g=p_g)


def constraint_set(notion: FairnessNotion, ds: LabeledDataset) -> ConstraintSet:
    return ConstraintSet(notion=notion, rates=base_rates(ds))


def constraint_value(
    cs: ConstraintSet,
    k: int,
    in_group: int,
    observed_label: int,
    candidate_y: int,
) -> float:
    """Per-example constraint value c_k(x, candidate_y), observed label standing
    in for the true one where the notion needs it. Returns 0 for candidate_y=0."""
    if not 0 <= k < cs.group_count:
        raise IndexError(f"group index {k} out of range")
    if candidate_y == 0:
        return 0.0
    g = float(in_group)
    y = float(observed_label)
    z, p_x, p_g = float(cs.rates.z[k]), cs.rates.p_x, float(cs.rates.p_g[k])
    notion = cs.notion
    if notion in (FairnessNotion.DEMOGRAPHIC_PARITY, FairnessNotion.DISPARATE_IMPACT):
        return g / z - 1.0
    if notion is FairnessNotion.EQUAL_OPPORTUNITY:
        return g * y / p_g - y / p_x
    # equalized odds exposes the TP constraint here; the FP block lives in
    # violation(), which returns both.
    return g * y / p_g - y / p_x


def positive_constraint_matrix(cs: ConstraintSet, ds: LabeledDataset) -> np.ndarray:
    """Matrix C with C[i, k] = c_k(x_i, 1); equalized odds stacks the FP block
    after the TP block, giving 2K columns."""
    g = ds.groups.astype(np.float64)
    y = ds.labels.astype(np.float64)
    z = cs.rates.z
    p_x = cs.rates.p_x
    p_g = cs.rates.p_g
    notion = cs.notion
    if notion in (FairnessNotion.DEMOGRAPHIC_PARITY, FairnessNotion.DISPARATE_IMPACT):
        return g / z - 1.0
    tp = g * y[:, None] / p_g - (y / p_x)[:, None]
    if notion is FairnessNotion.EQUAL_OPPORTUNITY:
        return tp
    fp = g * (1.0 - y)[:, None] / (z - p_g) - ((1.0 - y) / (1.0 - p_x))[:, None]
    return np.concatenate([tp, fp], axis=1)


def violation(cs: ConstraintSet, ds: LabeledDataset, scores: np.ndarray) -> np.ndarray:
    """Constraint violations of a scored classifier on a dataset.

    Returns a length-K vector (2K for equalized odds: TP block then FP block)
    whose k-th entry is the empirical mean of score(x) * c_k(x, 1).
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != (ds.n,):
        raise ValueError(f"scores must have shape ({ds.n},)")
    c1 = positive_constraint_matrix(cs, ds)
    return scores @ c1 / ds.n


def max_abs_violation(cs: ConstraintSet, ds: LabeledDataset, scores: np.ndarray) -> float:
    return float(np.abs(violation(cs, ds, scores)).max())
