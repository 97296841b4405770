"""Tabular dataset loading, protected-group derivation, splitting and masking."""

import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

RULE_CATEGORICAL = "categorical-equals"
RULE_THRESHOLD = "numeric-threshold"
RULE_QUANTILE = "quantile-bin"


@dataclass(frozen=True)
class GroupSpec:
    """Rule deriving one protected-group membership column from a raw CSV column.

    Supported rules:
      categorical-equals   member iff the raw cell equals ``value`` (string compare)
      numeric-threshold    member iff cell < cutoff (direction="below") or
                           cell >= cutoff (direction="above")
      quantile-bin         member iff cell falls in uniform-quantile bin
                           ``bin_index`` out of ``num_bins`` (lower-inclusive,
                           upper-exclusive except the last bin)
    """

    name: str
    column: str
    rule: str
    value: str | None = None
    cutoff: float | None = None
    direction: str = "below"
    num_bins: int | None = None
    bin_index: int | None = None

    def __post_init__(self):
        if self.rule not in (RULE_CATEGORICAL, RULE_THRESHOLD, RULE_QUANTILE):
            raise ValueError(f"group {self.name!r}: unknown rule {self.rule!r}")
        if self.rule == RULE_CATEGORICAL and self.value is None:
            raise ValueError(f"group {self.name!r}: categorical-equals needs a value")
        if self.rule == RULE_THRESHOLD:
            if self.cutoff is None:
                raise ValueError(f"group {self.name!r}: numeric-threshold needs a cutoff")
            if self.direction not in ("below", "above"):
                raise ValueError(f"group {self.name!r}: direction must be below or above")
        if self.rule == RULE_QUANTILE:
            if self.num_bins is None or self.bin_index is None:
                raise ValueError(f"group {self.name!r}: quantile-bin needs num_bins and bin_index")
            if self.num_bins < 2:
                raise ValueError(f"group {self.name!r}: num_bins must be >= 2")
            if not 0 <= self.bin_index < self.num_bins:
                raise ValueError(f"group {self.name!r}: bin_index out of range")


@dataclass(frozen=True)
class SplitConfig:
    test_fraction: float
    seed: int

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be strictly between 0 and 1")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


@dataclass(frozen=True)
class LabeledDataset:
    """Immutable design matrix with binary labels and group memberships.

    features   (n, d) float64, numeric columns standardized, categoricals one-hot
    labels     (n,) ints in {0, 1}
    groups     (n, K) ints in {0, 1}; groups[i, k] == 1 iff row i is in group k
    """

    features: np.ndarray
    labels: np.ndarray
    groups: np.ndarray
    feature_names: list[str] = field(default_factory=list)
    group_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        features = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        groups = np.asarray(self.groups, dtype=np.int64)
        if features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        n, d = features.shape
        if n < 1 or d < 1:
            raise ValueError("dataset needs at least one row and one feature column")
        if labels.shape != (n,):
            raise ValueError("labels length does not match feature rows")
        if groups.ndim != 2 or groups.shape[0] != n or groups.shape[1] < 1:
            raise ValueError("groups must be an (n, K) matrix with K >= 1")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must contain only 0 or 1")
        if not np.isin(groups, (0, 1)).all():
            raise ValueError("group membership entries must be 0 or 1")
        if not np.isfinite(features).all():
            raise ValueError("features must be finite")
        for arr, name in ((features, "features"), (labels, "labels"), (groups, "groups")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not self.feature_names:
            object.__setattr__(self, "feature_names", [f"x{j}" for j in range(d)])
        if not self.group_names:
            object.__setattr__(self, "group_names", [f"group_{k}" for k in range(groups.shape[1])])
        if len(self.feature_names) != d:
            raise ValueError("feature_names length does not match feature columns")
        if len(self.group_names) != groups.shape[1]:
            raise ValueError("group_names length does not match group columns")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @property
    def num_groups(self) -> int:
        return self.groups.shape[1]

    def subset(self, indices: np.ndarray) -> "LabeledDataset":
        """Row subset (copies; group/label degeneracy is not re-checked here)."""
        idx = np.asarray(indices)
        return LabeledDataset(
            features=self.features[idx],
            labels=self.labels[idx],
            groups=self.groups[idx],
            feature_names=list(self.feature_names),
            group_names=list(self.group_names),
        )


def check_groups_nondegenerate(ds: LabeledDataset, context: str = "dataset") -> None:
    """Every group column must have at least one member and one non-member."""
    counts = ds.groups.sum(axis=0)
    for k, name in enumerate(ds.group_names):
        if counts[k] == 0:
            raise ValueError(f"group {name!r} has no members in {context}")
        if counts[k] == ds.n:
            raise ValueError(f"group {name!r} has no non-members in {context}")


def _parse_numeric_column(raw: pd.Series, column: str) -> np.ndarray:
    values = np.empty(len(raw), dtype=np.float64)
    for i, cell in enumerate(raw):
        try:
            values[i] = float(cell)
        except (TypeError, ValueError):
            raise ValueError(
                f"column {column!r}: unparseable numeric cell at row {i}: {cell!r}"
            ) from None
    return values


def _column_kind(raw: pd.Series) -> str:
    """A column is numeric iff every cell parses as a float; mixed columns are errors."""
    parseable = 0
    for cell in raw:
        try:
            float(cell)
            parseable += 1
        except (TypeError, ValueError):
            pass
    if parseable == len(raw):
        return "numeric"
    if parseable == 0:
        return "categorical"
    return "mixed"


def derive_group_column(raw: pd.Series, spec: GroupSpec) -> np.ndarray:
    """Evaluate one GroupSpec on a raw (pre-standardization) column."""
    if spec.rule == RULE_CATEGORICAL:
        return (raw.to_numpy() == spec.value).astype(np.int64)
    values = _parse_numeric_column(raw, spec.column)
    if spec.rule == RULE_THRESHOLD:
        if spec.direction == "below":
            return (values < spec.cutoff).astype(np.int64)
        return (values >= spec.cutoff).astype(np.int64)
    # quantile-bin: uniform quantile edges over raw values, ties resolved by value
    edges = np.quantile(values, np.linspace(0.0, 1.0, spec.num_bins + 1))
    lo, hi = edges[spec.bin_index], edges[spec.bin_index + 1]
    member = (values >= lo) & (values < hi)
    if spec.bin_index == spec.num_bins - 1:
        member = (values >= lo) & (values <= hi)
    return member.astype(np.int64)


def load_csv(
    path,
    label_column: str,
    group_specs: list[GroupSpec],
    drop_columns: list[str] | None = None,
) -> LabeledDataset:
    """Load a comma-delimited UTF-8 CSV with a header row into a LabeledDataset.

    The label column must hold 0/1 values with both classes present. Numeric
    feature columns are standardized to zero mean and unit variance; constant
    columns are dropped with a warning; categorical columns are one-hot encoded
    as ``column=value`` indicators. Group membership is derived from the raw
    column values, before any standardization.
    """
    drop_columns = list(drop_columns or [])
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    if frame.shape[0] < 1:
        raise ValueError(f"{path}: no data rows")
    if label_column not in frame.columns:
        raise ValueError(f"label column {label_column!r} not found in {path}")
    for col in drop_columns:
        if col not in frame.columns:
            raise ValueError(f"drop column {col!r} not found in {path}")
    for spec in group_specs:
        if spec.column not in frame.columns:
            raise ValueError(f"group {spec.name!r}: column {spec.column!r} not found")
    if not group_specs:
        raise ValueError("at least one group spec is required")

    labels = _parse_labels(frame[label_column], label_column)

    group_cols = [derive_group_column(frame[spec.column], spec) for spec in group_specs]
    groups = np.stack(group_cols, axis=1)

    feature_frame = frame.drop(columns=[label_column] + drop_columns)
    if feature_frame.shape[1] == 0:
        raise ValueError("no feature columns left after dropping label/drop columns")

    blocks: list[np.ndarray] = []
    names: list[str] = []
    for col in feature_frame.columns:
        raw = feature_frame[col]
        kind = _column_kind(raw)
        if kind == "mixed":
            _parse_numeric_column(raw, col)  # raises naming the offending cell
        if kind == "numeric":
            values = _parse_numeric_column(raw, col)
            std = values.std()
            if std == 0.0:
                warnings.warn(f"dropping constant numeric column {col!r}", stacklevel=2)
                continue
            blocks.append((values - values.mean()) / std)
            names.append(col)
        else:
            categories = sorted(set(raw))
            if len(categories) == 1:
                warnings.warn(f"dropping constant categorical column {col!r}", stacklevel=2)
                continue
            cells = raw.to_numpy()
            for cat in categories:
                blocks.append((cells == cat).astype(np.float64))
                names.append(f"{col}={cat}")
    if not blocks:
        raise ValueError("all feature columns were constant")

    ds = LabeledDataset(
        features=np.column_stack(blocks),
        labels=labels,
        groups=groups,
        feature_names=names,
        group_names=[spec.name for spec in group_specs],
    )
    check_groups_nondegenerate(ds, context="loaded data")
    return ds


def _parse_labels(raw: pd.Series, label_column: str) -> np.ndarray:
    labels = np.empty(len(raw), dtype=np.int64)
    for i, cell in enumerate(raw):
        try:
            value = float(cell)
        except (TypeError, ValueError):
            value = -1.0
        if value not in (0.0, 1.0):
            raise ValueError(
                f"label column {label_column!r}: non-binary value at row {i}: {cell!r}"
            )
        labels[i] = int(value)
    if labels.min() == labels.max():
        raise ValueError("labels must contain both classes")
    return labels


def train_test_split(ds: LabeledDataset, cfg: SplitConfig) -> tuple[LabeledDataset, LabeledDataset]:
    """Deterministic row-level partition; row order inside each split is preserved.

    Every group must keep members and non-members in the train split; the test
    split is allowed to go degenerate.
    """
    n_test = int(round(ds.n * cfg.test_fraction))
    if n_test == 0 or n_test == ds.n:
        raise ValueError(
            f"test_fraction={cfg.test_fraction} yields an empty split for n={ds.n}"
        )
    perm = np.random.default_rng(cfg.seed).permutation(ds.n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    train, test = ds.subset(train_idx), ds.subset(test_idx)
    check_groups_nondegenerate(train, context="train split")
    return train, test


def mask_group_features(ds: LabeledDataset, masked_columns: list[str]) -> LabeledDataset:
    """Drop the named feature columns; labels and groups are untouched."""
    unknown = [c for c in masked_columns if c not in ds.feature_names]
    if unknown:
        raise ValueError(f"unknown feature columns: {unknown}")
    if not masked_columns:
        return ds
    keep = [j for j, name in enumerate(ds.feature_names) if name not in set(masked_columns)]
    if not keep:
        raise ValueError("masking would remove every feature column")
    return LabeledDataset(
        features=ds.features[:, keep],
        labels=ds.labels,
        groups=ds.groups,
        feature_names=[ds.feature_names[j] for j in keep],
        group_names=list(ds.group_names),
    )
