"""Feature tables: loading, joining, column views, filters, preprocessing, splits."""

from __future__ import annotations

import enum
import json
import math
import os
import re
import warnings
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .miner import (
    CSV_COLUMNS,
    GENERATIONS,
    GROSS_SIZE_FEATURES,
    IDENTITY_COLUMNS,
    NET_SIZE_FEATURES,
    SIZE_FEATURES,
    GenerationChain,
)
from .seeding import rng

LABELS = ("a", "c", "p")


class DatasetError(ValueError):
    pass


class SchemaError(DatasetError):
    pass


class EmptySelectionError(DatasetError):
    pass


class StratificationError(DatasetError):
    pass


class Role(enum.Enum):
    IDENTITY = "identity"
    KEYWORD = "keyword-feature"
    CHANGE = "change-feature"
    SIZE = "size-feature"
    LABEL = "label"


FEATURE_ROLES = (Role.KEYWORD, Role.CHANGE, Role.SIZE)


@dataclass(frozen=True)
class RowIssue:
    row: int | None
    sha1: str | None
    message: str


@dataclass(frozen=True)
class LabeledSample:
    sha1: str | None
    message_text: str | None
    features: Mapping[str, float]
    label: str


@dataclass(frozen=True, eq=False)
class Dataset:
    """A table plus the role of each column.

    Canonical column names: ``sha1``, ``message``, ``project`` (identity) and
    ``label``. Mined tables carry no label column.
    """

    frame: pd.DataFrame
    roles: Mapping[str, Role]
    provenance: str = ""
    issues: tuple[RowIssue, ...] = ()

    def __post_init__(self):
        if list(self.roles) != list(self.frame.columns):
            raise SchemaError("roles must cover the frame's columns in order")
        label_cols = [c for c, r in self.roles.items() if r is Role.LABEL]
        if len(label_cols) > 1 or (label_cols and label_cols != ["label"]):
            raise SchemaError(f"expected at most one label column named 'label', got {label_cols}")
        if label_cols:
            bad = set(self.frame["label"].unique()) - set(LABELS)
            if bad:
                raise SchemaError(f"labels outside {LABELS}: {sorted(map(str, bad))}")
        if "sha1" in self.frame.columns and self.frame["sha1"].duplicated().any():
            raise SchemaError("duplicate sha1 rows")

    def __len__(self):
        return len(self.frame)

    @property
    def schema(self) -> list[tuple[str, Role]]:
        return list(self.roles.items())

    def columns_with(self, *roles: Role) -> list[str]:
        return [c for c, r in self.roles.items() if r in roles]

    @property
    def feature_columns(self) -> list[str]:
        return self.columns_with(*FEATURE_ROLES)

    @property
    def has_labels(self) -> bool:
        return "label" in self.roles

    @property
    def labels(self) -> np.ndarray:
        return self.frame["label"].to_numpy(dtype=object)

    @property
    def messages(self) -> list[str] | None:
        if "message" not in self.frame.columns:
            return None
        return self.frame["message"].astype(str).tolist()

    def matrix(self, columns: Sequence[str] | None = None) -> np.ndarray:
        columns = self.feature_columns if columns is None else list(columns)
        missing = [c for c in columns if c not in self.roles]
        if missing:
            raise SchemaError(f"missing feature columns: {missing}")
        return self.frame[columns].to_numpy(dtype=float)

    def take(self, index: Sequence[int] | np.ndarray, provenance: str | None = None) -> Dataset:
        frame = self.frame.iloc[np.asarray(index, dtype=int)].reset_index(drop=True)
        return Dataset(frame, dict(self.roles), provenance or self.provenance)

    def select(self, columns: Sequence[str], provenance: str | None = None) -> Dataset:
        keep = [c for c in self.frame.columns if c in set(columns)]
        return Dataset(self.frame[keep].copy(), {c: self.roles[c] for c in keep}, provenance or self.provenance)

    def samples(self) -> Iterator[LabeledSample]:
        feats = self.feature_columns
        has_sha = "sha1" in self.frame.columns
        has_msg = "message" in self.frame.columns
        for row in self.frame.itertuples(index=False):
            d = dict(zip(self.frame.columns, row))
            yield LabeledSample(
                sha1=d["sha1"] if has_sha else None,
                message_text=d["message"] if has_msg else None,
                features={c: float(d[c]) for c in feats},
                label=d["label"],
            )

    def to_csv(self, path: str | os.PathLike) -> None:
        self.frame.to_csv(path, index=False, lineterminator="\n", float_format="%.6f")


# --- loading --------------------------------------------------------------


@dataclass
class ColumnMapping:
    """Where the canonical columns live in an external labeled CSV."""

    sha1: str = "sha1"
    label: str = "label"
    message: str | None = None
    project: str | None = None
    keyword_columns: tuple[str, ...] = ()
    change_columns: tuple[str, ...] = ()
    size_columns: tuple[str, ...] = ()
    label_values: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def from_document(cls, doc: Mapping) -> ColumnMapping:
        known = {f for f in cls.__dataclass_fields__}
        kwargs = {k: v for k, v in doc.items() if k in known}
        for key in ("keyword_columns", "change_columns", "size_columns"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


# Placeholder vocabulary; align with the labeled dataset's keyword list for exact reproduction.
DEFAULT_KEYWORDS = (
    "fix", "bug", "add", "new", "remove", "test", "update", "change", "support", "implement",
    "allow", "improve", "refactor", "clean", "move", "rename", "error", "feature", "use", "instead",
)


def keyword_pattern(word: str) -> re.Pattern:
    return re.compile(r"\b" + re.escape(word) + r"\b", re.IGNORECASE)


def keyword_features(messages: Sequence[str], vocabulary: Sequence[str]) -> pd.DataFrame:
    """Binary occurrence indicator per vocabulary word, columns ``kw_<word>``."""
    data = {}
    for word in vocabulary:
        pat = keyword_pattern(word)
        data[f"kw_{word}"] = [1.0 if pat.search(m or "") else 0.0 for m in messages]
    return pd.DataFrame(data, index=range(len(messages)))


def has_keyword(message: str | None, vocabulary: Iterable[str]) -> bool:
    if not message:
        return False
    return any(keyword_pattern(w).search(message) for w in vocabulary)


def _normalize_label(raw: str, label_values: Mapping[str, str]) -> str | None:
    value = str(raw).strip()
    value = label_values.get(value, label_values.get(value.lower(), value)).strip().lower()
    return value if value in LABELS else None


def load_labeled_csv(
    path: str | os.PathLike,
    mapping: ColumnMapping | None = None,
    vocabulary: Sequence[str] | None = None,
) -> Dataset:
    """Load an externally labeled commit table.

    Rows with an unknown label or unparseable numerics are rejected and
    recorded in ``Dataset.issues``; duplicate SHA1 rows keep the first one.
    When ``vocabulary`` is given and the mapping lists no keyword columns,
    keyword indicators are computed from the message column.
    """
    mapping = mapping or ColumnMapping()
    raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    required = [mapping.sha1, mapping.label]
    optional = [c for c in (mapping.message, mapping.project) if c]
    numeric = list(mapping.keyword_columns) + list(mapping.change_columns) + list(mapping.size_columns)
    missing = [c for c in required + optional + numeric if c not in raw.columns]
    if missing:
        raise SchemaError(f"{path}: mapped columns not found: {missing}")

    issues: list[RowIssue] = []
    keep_rows = []
    labels = []
    values = {c: [] for c in numeric}
    for i, row in enumerate(raw.itertuples(index=False)):
        rec = dict(zip(raw.columns, row))
        sha = rec[mapping.sha1].strip()
        label = _normalize_label(rec[mapping.label], mapping.label_values)
        if label is None:
            issues.append(RowIssue(i, sha, f"label {rec[mapping.label]!r} not in {LABELS}"))
            continue
        parsed = {}
        try:
            for c in numeric:
                parsed[c] = float(rec[c])
                if math.isnan(parsed[c]):
                    raise ValueError("NaN")
        except ValueError:
            issues.append(RowIssue(i, sha, f"column {c!r}: unparseable numeric {rec[c]!r}"))
            continue
        keep_rows.append(i)
        labels.append(label)
        for c in numeric:
            values[c].append(parsed[c])

    frame = pd.DataFrame({"sha1": [raw[mapping.sha1].iloc[i].strip() for i in keep_rows]})
    roles = {"sha1": Role.IDENTITY}
    if mapping.project:
        frame["project"] = [raw[mapping.project].iloc[i] for i in keep_rows]
        roles["project"] = Role.IDENTITY
    if mapping.message:
        frame["message"] = [raw[mapping.message].iloc[i] for i in keep_rows]
        roles["message"] = Role.IDENTITY
    for cols, role in (
        (mapping.keyword_columns, Role.KEYWORD),
        (mapping.change_columns, Role.CHANGE),
        (mapping.size_columns, Role.SIZE),
    ):
        for c in cols:
            frame[c] = values[c]
            roles[c] = role
    if vocabulary and not mapping.keyword_columns:
        if not mapping.message:
            raise SchemaError("keyword features need a message column")
        kw = keyword_features(frame["message"].tolist(), vocabulary)
        for c in kw.columns:
            frame[c] = kw[c].to_numpy()
            roles[c] = Role.KEYWORD
    frame["label"] = labels
    roles["label"] = Role.LABEL

    dup = frame["sha1"].duplicated(keep="first")
    for i in np.flatnonzero(dup.to_numpy()):
        issues.append(RowIssue(keep_rows[i], frame["sha1"].iloc[i], "duplicate sha1 dropped"))
    frame = frame[~dup].reset_index(drop=True)
    return Dataset(frame, roles, f"labeled:{os.fspath(path)}", tuple(issues))


def load_mined_csv(path: str | os.PathLike) -> Dataset:
    """Load a miner CSV (one row per commit, no labels)."""
    frame = pd.read_csv(path, dtype={"sha1": str, "parent_sha1": str, "project": str}, keep_default_na=False)
    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: not a miner CSV, missing {missing}")
    frame = frame[list(CSV_COLUMNS)].copy()
    frame["is_merge"] = frame["is_merge"].astype(str).str.lower().isin(["true", "1"])
    frame = frame.drop_duplicates("sha1", keep="first").reset_index(drop=True)
    roles = {c: Role.IDENTITY for c in IDENTITY_COLUMNS}
    roles.update({c: Role.SIZE for c in SIZE_FEATURES})
    return Dataset(frame, roles, f"mined:{os.fspath(path)}")


def from_records(records, labels: Mapping[str, str] | None = None) -> Dataset:
    """Dataset from in-memory :class:`CommitSizeRecord` objects, optionally labeled."""
    rows = [{c: getattr(r, c) for c in CSV_COLUMNS} for r in records]
    frame = pd.DataFrame(rows, columns=list(CSV_COLUMNS))
    roles = {c: Role.IDENTITY for c in IDENTITY_COLUMNS}
    roles.update({c: Role.SIZE for c in SIZE_FEATURES})
    if labels is not None:
        frame = frame[frame["sha1"].isin(labels)].reset_index(drop=True)
        frame["label"] = [labels[s] for s in frame["sha1"]]
        roles["label"] = Role.LABEL
    return Dataset(frame, roles, "records")


# --- joins and column views ----------------------------------------------


def merge_on_sha(left: Dataset, right: Dataset) -> Dataset:
    """Inner join on ``sha1``; the result's schema is the union of both.

    Shared identity columns are kept once and must agree on every joined row;
    any other shared column name is a schema conflict.
    """
    for ds in (left, right):
        if "sha1" not in ds.roles:
            raise SchemaError("both datasets need a sha1 column")
    shared = [c for c in left.roles if c in right.roles and c != "sha1"]
    bad = [c for c in shared if left.roles[c] is not Role.IDENTITY or right.roles[c] is not Role.IDENTITY]
    if bad:
        raise SchemaError(f"conflicting columns in merge: {bad}")
    rf = right.frame.rename(columns={c: f"{c}__right" for c in shared})
    merged = left.frame.merge(rf, on="sha1", how="inner", sort=False)
    for c in shared:
        a = merged[c].astype(str)
        b = merged[f"{c}__right"].astype(str)
        if (a != b).any():
            raise SchemaError(f"column {c!r} disagrees between the joined datasets")
        merged = merged.drop(columns=[f"{c}__right"])
    roles = {}
    for c in merged.columns:
        roles[c] = left.roles.get(c) or right.roles[c]
    # label column last, identity first
    order = (
        [c for c in merged.columns if roles[c] is Role.IDENTITY]
        + [c for c in merged.columns if roles[c] in FEATURE_ROLES]
        + [c for c in merged.columns if roles[c] is Role.LABEL]
    )
    merged = merged[order].reset_index(drop=True)
    return Dataset(merged, {c: roles[c] for c in order}, f"merge({left.provenance}, {right.provenance})")


GROUP_ROLES = {
    "keywords": (Role.KEYWORD,),
    "changes": (Role.CHANGE,),
    "density": (Role.SIZE,),
    "combined": FEATURE_ROLES,
}


def vertical_split(dataset: Dataset, group: str) -> Dataset:
    """Keep identity and label columns plus the feature columns of one group."""
    try:
        roles = GROUP_ROLES[group]
    except KeyError:
        raise ValueError(f"unknown group {group!r}; expected one of {sorted(GROUP_ROLES)}") from None
    features = dataset.columns_with(*roles)
    if not features:
        raise EmptySelectionError(f"no {group} feature columns in dataset")
    keep = dataset.columns_with(Role.IDENTITY, Role.LABEL) + features
    return dataset.select(keep, f"{dataset.provenance}|{group}")


def size_variant(dataset: Dataset, variant: str) -> Dataset:
    """Net (10 net counts + 2 ratios) or gross (10 gross counts) size columns only."""
    wanted = {"net": NET_SIZE_FEATURES, "gross": GROSS_SIZE_FEATURES}[variant]
    features = [c for c in dataset.columns_with(Role.SIZE) if c in wanted]
    if not features:
        raise EmptySelectionError(f"no {variant} size columns")
    return dataset.select(dataset.columns_with(Role.IDENTITY, Role.LABEL) + features, f"{dataset.provenance}|{variant}")


@dataclass(frozen=True)
class VariantSpec:
    variant: str
    generations: int

    def __post_init__(self):
        if self.variant not in VARIANT_ROLES:
            raise ValueError(f"variant must be one of {sorted(VARIANT_ROLES)}")
        if self.generations not in GENERATIONS:
            raise ValueError(f"generations must be one of {GENERATIONS}")


VARIANT_ROLES = {
    "A": (Role.KEYWORD, Role.CHANGE),
    "B": (Role.SIZE,),
    "C": (Role.KEYWORD, Role.CHANGE, Role.SIZE),
    "D": (Role.CHANGE, Role.SIZE),
}


def build_generation_dataset(
    variant: VariantSpec, chains: Iterable[GenerationChain], merged: Dataset
) -> Dataset:
    """One row per chain: principal features per variant plus ``<feature>_gen<i>``
    size columns for each parent generation."""
    g = variant.generations
    principal_cols = merged.columns_with(*VARIANT_ROLES[variant.variant])
    if not principal_cols:
        raise EmptySelectionError(f"variant {variant.variant}: merged dataset has no matching columns")
    ident_cols = merged.columns_with(Role.IDENTITY)
    index = {s: i for i, s in enumerate(merged.frame["sha1"])}
    issues = []
    rows = []
    for chain in chains:
        sha = chain.principal.sha1
        if sha not in index:
            issues.append(RowIssue(None, sha, "principal not in merged dataset"))
            continue
        if len(chain.parents) < g:
            issues.append(RowIssue(None, sha, f"chain has {len(chain.parents)} < {g} parents"))
            continue
        src = merged.frame.iloc[index[sha]]
        row = {c: src[c] for c in ident_cols + principal_cols}
        for gen, parent in enumerate(chain.parents[:g], start=1):
            for feat in SIZE_FEATURES:
                row[f"{feat}_gen{gen}"] = getattr(parent, feat)
        row["label"] = src["label"]
        rows.append(row)
    parent_cols = [f"{feat}_gen{gen}" for gen in range(1, g + 1) for feat in SIZE_FEATURES]
    columns = ident_cols + principal_cols + parent_cols + ["label"]
    frame = pd.DataFrame(rows, columns=columns)
    roles = {c: merged.roles[c] for c in ident_cols + principal_cols}
    roles.update({c: Role.SIZE for c in parent_cols})
    roles["label"] = Role.LABEL
    prov = f"generations({variant.variant},{g})<-{merged.provenance}"
    return Dataset(frame, roles, prov, tuple(issues))


# --- filters --------------------------------------------------------------


def correlation_filter(
    dataset: Dataset, cutoff: float = 0.75, columns: Sequence[str] | None = None
) -> tuple[list[str], list[str]]:
    """Drop one member of each pair with ``|r| > cutoff`` until none remain.

    The most correlated pair is handled first; of its two members the one with
    the larger mean absolute correlation to the other kept columns goes. Ties
    keep the column that comes first in the schema. Constant columns are
    ignored (they correlate with nothing).
    """
    columns = list(dataset.feature_columns if columns is None else columns)
    X = dataset.matrix(columns)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.corrcoef(X, rowvar=False) if X.shape[1] > 1 else np.ones((1, 1))
    corr = np.atleast_2d(np.abs(np.nan_to_num(corr, nan=0.0)))
    np.fill_diagonal(corr, 0.0)
    alive = list(range(len(columns)))
    removed = []
    while len(alive) > 1:
        sub = corr[np.ix_(alive, alive)]
        if sub.max() <= cutoff:
            break
        # first pair in schema order among the maximal ones
        i, j = np.unravel_index(np.argmax(np.triu(sub, 1)), sub.shape)
        mean_abs = sub.sum(axis=1) / (len(alive) - 1)
        drop = i if mean_abs[i] > mean_abs[j] else j
        removed.append(columns[alive[drop]])
        del alive[drop]
    kept = [columns[k] for k in alive]
    return kept, removed


def near_zero_variance(
    values: np.ndarray, freq_ratio: float = 19.0, unique_fraction: float = 0.10
) -> tuple[bool, bool]:
    """(zero variance, near-zero variance) for one column."""
    uniq, counts = np.unique(values, return_counts=True)
    if len(uniq) <= 1:
        return True, True
    top = np.sort(counts)[::-1]
    ratio = top[0] / top[1]
    return False, bool(ratio > freq_ratio and len(uniq) / len(values) < unique_fraction)


def variance_filter(
    dataset: Dataset,
    near_zero: bool = True,
    freq_ratio: float = 19.0,
    unique_fraction: float = 0.10,
) -> Dataset:
    """Drop constant feature columns and, with ``near_zero``, near-zero-variance ones."""
    drop = []
    for c in dataset.feature_columns:
        zero, nzv = near_zero_variance(dataset.frame[c].to_numpy(), freq_ratio, unique_fraction)
        if zero or (near_zero and nzv):
            drop.append(c)
    keep = [c for c in dataset.frame.columns if c not in set(drop)]
    return dataset.select(keep, f"{dataset.provenance}|variance-filter(-{len(drop)})")


# --- preprocessing --------------------------------------------------------

PREPROCESS_STEPS = ("yeo_johnson", "center", "scale")
YJ_GRID = np.round(np.arange(-2.0, 2.0 + 1e-9, 0.1), 10)


def yeo_johnson(x: np.ndarray, lmbda: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    if abs(lmbda) < 1e-12:
        out[pos] = np.log1p(x[pos])
    else:
        out[pos] = (np.power(x[pos] + 1.0, lmbda) - 1.0) / lmbda
    if abs(lmbda - 2.0) < 1e-12:
        out[~pos] = -np.log1p(-x[~pos])
    else:
        out[~pos] = -(np.power(1.0 - x[~pos], 2.0 - lmbda) - 1.0) / (2.0 - lmbda)
    return out


def yeo_johnson_inverse(y: np.ndarray, lmbda: float) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    pos = y >= 0
    if abs(lmbda) < 1e-12:
        out[pos] = np.expm1(y[pos])
    else:
        out[pos] = np.power(lmbda * y[pos] + 1.0, 1.0 / lmbda) - 1.0
    if abs(lmbda - 2.0) < 1e-12:
        out[~pos] = -np.expm1(-y[~pos])
    else:
        out[~pos] = 1.0 - np.power(1.0 - (2.0 - lmbda) * y[~pos], 1.0 / (2.0 - lmbda))
    return out


def yeo_johnson_loglik(x: np.ndarray, lmbda: float) -> float:
    """Profile Gaussian log-likelihood of the transformed column."""
    x = np.asarray(x, dtype=float)
    y = yeo_johnson(x, lmbda)
    var = y.var()
    if var <= 0 or not np.isfinite(var):
        return -np.inf
    n = len(x)
    return -0.5 * n * np.log(var) + (lmbda - 1.0) * np.sum(np.sign(x) * np.log1p(np.abs(x)))


def fit_yeo_johnson(x: np.ndarray, grid: np.ndarray = YJ_GRID) -> float:
    scores = [yeo_johnson_loglik(x, lm) for lm in grid]
    return float(grid[int(np.argmax(scores))])


@dataclass
class Preprocessor:
    """Fitted per-column parameters; apply with :meth:`transform`."""

    steps: tuple[str, ...]
    columns: tuple[str, ...]
    lambdas: dict[str, float] = field(default_factory=dict)
    means: dict[str, float] = field(default_factory=dict)
    sds: dict[str, float] = field(default_factory=dict)

    def transform(self, dataset: Dataset) -> Dataset:
        frame = dataset.frame.copy()
        for c in self.columns:
            x = frame[c].to_numpy(dtype=float)
            if c in self.lambdas:
                x = yeo_johnson(x, self.lambdas[c])
            if c in self.means:
                x = x - self.means[c]
            if c in self.sds:
                x = x / self.sds[c]
            frame[c] = x
        return Dataset(frame, dict(dataset.roles), f"{dataset.provenance}|preprocess{list(self.steps)}")

    def inverse_transform(self, dataset: Dataset) -> Dataset:
        frame = dataset.frame.copy()
        for c in self.columns:
            x = frame[c].to_numpy(dtype=float)
            if c in self.sds:
                x = x * self.sds[c]
            if c in self.means:
                x = x + self.means[c]
            if c in self.lambdas:
                x = yeo_johnson_inverse(x, self.lambdas[c])
            frame[c] = x
        return Dataset(frame, dict(dataset.roles), dataset.provenance)

    def to_document(self) -> dict:
        return {
            "steps": list(self.steps),
            "columns": list(self.columns),
            "lambdas": self.lambdas,
            "means": self.means,
            "sds": self.sds,
        }

    @classmethod
    def from_document(cls, doc: Mapping) -> Preprocessor:
        return cls(tuple(doc["steps"]), tuple(doc["columns"]), dict(doc["lambdas"]),
                   dict(doc["means"]), dict(doc["sds"]))


def preprocess(
    dataset: Dataset, steps: Iterable[str], columns: Sequence[str] | None = None
) -> tuple[Dataset, Preprocessor]:
    """Fit and apply Yeo-Johnson, centering and scaling (in that order).

    Scaling uses the sample standard deviation; constant columns are left
    unscaled with a warning.
    """
    requested = set(steps)
    unknown = requested - set(PREPROCESS_STEPS)
    if unknown:
        raise ValueError(f"unknown preprocessing steps {sorted(unknown)}")
    steps = tuple(s for s in PREPROCESS_STEPS if s in requested)
    columns = tuple(dataset.feature_columns if columns is None else columns)
    pp = Preprocessor(steps, columns)
    for c in columns:
        x = dataset.frame[c].to_numpy(dtype=float)
        if "yeo_johnson" in steps:
            pp.lambdas[c] = fit_yeo_johnson(x)
            x = yeo_johnson(x, pp.lambdas[c])
        if "center" in steps:
            pp.means[c] = float(x.mean())
            x = x - pp.means[c]
        if "scale" in steps:
            sd = float(x.std(ddof=1)) if len(x) > 1 else 0.0
            if sd > 0 and np.isfinite(sd):
                pp.sds[c] = sd
            else:
                warnings.warn(f"column {c!r} has zero variance; not scaled", RuntimeWarning, stacklevel=2)
    return pp.transform(dataset), pp


# --- splitting ------------------------------------------------------------


@dataclass(frozen=True)
class SplitPlan:
    train_fraction: float = 0.85
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def split_indices(labels: Sequence[str], plan: SplitPlan) -> tuple[np.ndarray, np.ndarray]:
    labels = np.asarray(labels, dtype=object)
    n = len(labels)
    if n < 10:
        raise DatasetError(f"need at least 10 rows to split, got {n}")
    gen = rng(plan.seed, "split")
    train = []
    if plan.stratified:
        for lab in LABELS:
            idx = np.flatnonzero(labels == lab)
            if len(idx) == 0:
                continue
            if len(idx) < 2:
                raise StratificationError(f"class {lab!r} has {len(idx)} row(s); need >= 2")
            perm = gen.permutation(idx)
            train.extend(perm[: _round_half_up(plan.train_fraction * len(idx))])
    else:
        perm = gen.permutation(n)
        train.extend(perm[: _round_half_up(plan.train_fraction * n)])
    mask = np.zeros(n, dtype=bool)
    mask[np.asarray(train, dtype=int)] = True
    return np.flatnonzero(mask), np.flatnonzero(~mask)


def split(dataset: Dataset, plan: SplitPlan = SplitPlan()) -> tuple[Dataset, Dataset]:
    train, valid = split_indices(dataset.labels, plan)
    return (
        dataset.take(train, f"{dataset.provenance}|train{plan.train_fraction}"),
        dataset.take(valid, f"{dataset.provenance}|validation"),
    )


# --- persistence ----------------------------------------------------------


def schema_path(path: str | os.PathLike) -> str:
    return os.fspath(path) + ".schema.json"


_IDENTITY_NAMES = set(IDENTITY_COLUMNS) | {"message"}
_GEN_SUFFIX = re.compile(r"_gen\d+$")


def infer_role(column: str) -> Role:
    """Role by naming convention, used when a table has no schema sidecar."""
    if column == "label":
        return Role.LABEL
    if column in _IDENTITY_NAMES:
        return Role.IDENTITY
    if column.startswith("kw_"):
        return Role.KEYWORD
    if column in SIZE_FEATURES or (_GEN_SUFFIX.search(column) and _GEN_SUFFIX.sub("", column) in SIZE_FEATURES):
        return Role.SIZE
    return Role.CHANGE


def save_dataset(dataset: Dataset, path: str | os.PathLike) -> None:
    """Write the table as CSV and its column roles to ``<path>.schema.json``."""
    dataset.frame.to_csv(path, index=False, lineterminator="\n")
    doc = {"columns": [[c, r.value] for c, r in dataset.roles.items()], "provenance": dataset.provenance}
    with open(schema_path(path), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_dataset(path: str | os.PathLike) -> Dataset:
    """Read a table written by :func:`save_dataset`; without a sidecar, roles
    are inferred from column names."""
    frame = pd.read_csv(path, dtype={"sha1": str, "parent_sha1": str, "project": str, "message": str,
                                     "label": str}, keep_default_na=False)
    sidecar = schema_path(path)
    if os.path.exists(sidecar):
        with open(sidecar, encoding="utf-8") as fh:
            doc = json.load(fh)
        roles = {c: Role(r) for c, r in doc["columns"]}
        if list(roles) != list(frame.columns):
            raise SchemaError(f"{sidecar} does not match the columns of {path}")
        provenance = doc.get("provenance", "")
    else:
        roles = {c: infer_role(c) for c in frame.columns}
        provenance = f"table:{os.fspath(path)}"
    for c, r in roles.items():
        if r in FEATURE_ROLES:
            try:
                frame[c] = pd.to_numeric(frame[c])
            except (ValueError, TypeError) as exc:
                raise SchemaError(f"{path}: feature column {c!r} is not numeric") from exc
    if "is_merge" in frame.columns:
        frame["is_merge"] = frame["is_merge"].astype(str).str.lower().isin(["true", "1"])
    return Dataset(frame, roles, provenance)
