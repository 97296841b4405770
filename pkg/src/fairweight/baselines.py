"""Comparison methods: unconstrained training and post-hoc threshold
calibration over group-intersection cells."""

from dataclasses import dataclass, field

import numpy as np

from .classifier import ModelParams, TrainConfig, predict_proba, train_weighted
from .constraints import ConstraintSet, FairnessNotion, positive_constraint_matrix
from .data import LabeledDataset

MIN_CELL_SIZE = 5  # smaller intersection cells keep the global 0.5 threshold


def train_unconstrained(ds: LabeledDataset, tcfg: TrainConfig | None = None) -> ModelParams:
    """Plain logistic regression: weighted training with uniform weights."""
    return train_weighted(ds, np.ones(ds.n), tcfg or TrainConfig())


@dataclass(frozen=True)
class CalibratedModel:
    """Base model plus one decision threshold per group-intersection signature
    (a tuple of 0/1 memberships); unseen signatures fall back to 0.5."""

    base: ModelParams
    thresholds: dict = field(default_factory=dict)

    def threshold_for(self, signature: tuple) -> float:
        return self.thresholds.get(tuple(signature), 0.5)

    def predict_label(self, features: np.ndarray, groups: np.ndarray) -> np.ndarray:
        probs = predict_proba(self.base, features)
        cutoffs = np.array(
            [self.threshold_for(tuple(row)) for row in np.asarray(groups)], dtype=np.float64
        )
        return (probs >= cutoffs).astype(np.int64)

    def thresholds_json(self) -> dict:
        return {
            "".join(str(int(b)) for b in sig): thr for sig, thr in sorted(self.thresholds.items())
        }


def _cells_by_signature(groups: np.ndarray) -> dict:
    cells: dict[tuple, list[int]] = {}
    for i, row in enumerate(groups):
        cells.setdefault(tuple(int(v) for v in row), []).append(i)
    return {sig: np.asarray(idx) for sig, idx in sorted(cells.items())}


def calibrate(m: ModelParams, ds: LabeledDataset, cs: ConstraintSet) -> CalibratedModel:
    """Pick per-cell thresholds minimizing the training-set max violation.

    Each group-intersection cell's candidate set is its own predicted
    probabilities plus 0.5. Cells are revisited in signature order, each taking
    the candidate that minimizes the current max violation given the others
    (ties resolved toward 0.5, then toward the smaller threshold), until no
    threshold changes. Starting from all-0.5 with 0.5 always a candidate, the
    result never violates more than plain 0.5 thresholding.
    """
    if cs.notion not in (FairnessNotion.DEMOGRAPHIC_PARITY, FairnessNotion.EQUAL_OPPORTUNITY):
        raise ValueError(f"calibration does not support {cs.notion.value}")
    if cs.group_count != ds.num_groups:
        raise ValueError("constraint set and dataset disagree on group count")

    probs = predict_proba(m, ds.features)
    c1 = positive_constraint_matrix(cs, ds)  # (n, K)
    cells = _cells_by_signature(ds.groups)

    # Per cell: probabilities ascending, suffix sums of c1 rows in that order.
    # With threshold t the cell's predictions are its rows with prob >= t, so
    # the cell's violation contribution is one suffix-sum lookup.
    cell_order = {}
    cell_suffix = {}
    cell_candidates = {}
    for sig, idx in cells.items():
        order = idx[np.argsort(probs[idx], kind="stable")]
        sorted_probs = probs[order]
        suffix = np.zeros((len(order) + 1, c1.shape[1]))
        suffix[:-1] = np.cumsum(c1[order][::-1], axis=0)[::-1]
        cell_order[sig] = sorted_probs
        cell_suffix[sig] = suffix
        if len(idx) < MIN_CELL_SIZE:
            cell_candidates[sig] = np.array([0.5])
        else:
            cell_candidates[sig] = np.union1d(np.unique(sorted_probs), [0.5])

    def contribution(sig: tuple, threshold: float) -> np.ndarray:
        j = np.searchsorted(cell_order[sig], threshold, side="left")
        return cell_suffix[sig][j]

    thresholds = {sig: 0.5 for sig in cells}
    total = sum(contribution(sig, 0.5) for sig in cells)

    for _ in range(20):
        changed = False
        for sig in cells:
            outside = total - contribution(sig, thresholds[sig])
            best = None
            for t in cell_candidates[sig]:
                max_violation = np.abs((outside + contribution(sig, t)) / ds.n).max()
                key = (max_violation, abs(t - 0.5), t)
                if best is None or key < best[0]:
                    best = (key, t)
            if best[1] != thresholds[sig]:
                thresholds[sig] = best[1]
                changed = True
            total = outside + contribution(sig, thresholds[sig])
        if not changed:
            break

    return CalibratedModel(base=m, thresholds=thresholds)
