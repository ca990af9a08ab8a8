"""Descriptive statistics over commit size tables."""

from __future__ import annotations

import json
import math
import os
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .dataset import LABELS
from .miner import FILE_FEATURES, LINE_FEATURES


class InvalidInputError(ValueError):
    pass


QUANTILE_PROBS = (0.0, 0.05, 0.1, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 0.9, 0.95, 1.0)


@dataclass(frozen=True)
class Ecdf:
    """Empirical distribution of a finite sample."""

    values: np.ndarray  # sorted

    def __call__(self, x):
        """Fraction of values <= x (vectorised)."""
        return np.searchsorted(self.values, x, side="right") / len(self.values)

    def quantile(self, q):
        """Type-1 quantile: the smallest value whose ECDF reaches ``q``."""
        q = np.asarray(q, dtype=float)
        if np.any((q < 0) | (q > 1)):
            raise InvalidInputError("quantile probabilities must lie in [0, 1]")
        n = len(self.values)
        idx = np.clip(np.ceil(q * n - 1e-12).astype(int) - 1, 0, n - 1)
        return self.values[idx]

    def quantile_table(self, probs: Sequence[float] = QUANTILE_PROBS) -> pd.DataFrame:
        return pd.DataFrame({"probability": list(probs), "quantile": self.quantile(probs)})


def ecdf(values: Iterable[float]) -> Ecdf:
    arr = np.sort(np.asarray(list(values), dtype=float))
    if arr.size == 0:
        raise InvalidInputError("ECDF of an empty sequence")
    if np.isnan(arr).any():
        raise InvalidInputError("ECDF input contains NaN")
    return Ecdf(arr)


def density_one_share(densities: Iterable[float]) -> float:
    """Fraction of commits whose density is exactly 1 (0 for no input)."""
    arr = np.asarray(list(densities), dtype=float)
    return float(np.mean(arr == 1.0)) if arr.size else 0.0


@dataclass(frozen=True)
class SizePredicate:
    name: str
    test: Callable[[np.ndarray], np.ndarray]


def interval(lo: float | None, hi: float | None) -> SizePredicate:
    """``lo <= x < hi`` with either bound optional."""
    if lo is None and hi is None:
        raise ValueError("interval needs at least one bound")
    if lo is None:
        name = f"x<{hi:g}"
    elif hi is None:
        name = f"x>={lo:g}"
    else:
        name = f"{lo:g}<=x<{hi:g}"

    def test(x):
        ok = np.ones(len(x), dtype=bool)
        if lo is not None:
            ok &= x >= lo
        if hi is not None:
            ok &= x < hi
        return ok

    return SizePredicate(name, test)


DEFAULT_PREDICATES = (interval(None, 1), interval(1, 2), interval(2, 5))


@dataclass
class ConditionalProbabilityTable:
    """``P(label | predicate)``; ``None`` marks a predicate without support."""

    column: str
    predicates: tuple[str, ...]
    support: dict[str, int]
    probabilities: dict[tuple[str, str], float | None]

    def get(self, label: str, predicate: str) -> float | None:
        return self.probabilities[(label, predicate)]

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for pred in self.predicates:
            for lab in LABELS:
                p = self.probabilities[(lab, pred)]
                rows.append({
                    "column": self.column,
                    "predicate": pred,
                    "label": lab,
                    "support": self.support[pred],
                    "probability": "n/a" if p is None else f"{p:.6f}",
                })
        return pd.DataFrame(rows)


def conditional_probability_table(
    values: Sequence[float],
    labels: Sequence[str],
    column: str = "x",
    predicates: Sequence[SizePredicate] = DEFAULT_PREDICATES,
) -> ConditionalProbabilityTable:
    x = np.asarray(values, dtype=float)
    y = np.asarray(labels, dtype=object)
    if len(x) != len(y):
        raise InvalidInputError("values and labels differ in length")
    probs = {}
    support = {}
    for pred in predicates:
        mask = pred.test(x)
        n = int(mask.sum())
        support[pred.name] = n
        for lab in LABELS:
            probs[(lab, pred.name)] = float(np.sum(y[mask] == lab) / n) if n else None
    return ConditionalProbabilityTable(column, tuple(p.name for p in predicates), support, probs)


@dataclass(frozen=True)
class EffortInputs:
    density: float
    size_gross: float
    time: float

    def __post_init__(self):
        if not self.time > 0:
            raise InvalidInputError("time must be positive")
        if self.size_gross < 0:
            raise InvalidInputError("size_gross must be non-negative")
        if not 0.0 <= self.density <= 1.0:
            raise InvalidInputError("density must lie in [0, 1]")


def effort_metrics(inputs: EffortInputs) -> dict[str, float]:
    """Size-per-time effort and effort-per-size productivity, gross and net.

    Net size is ``density * size_gross``; net productivity reduces to
    ``density / time``.
    """
    functionality = inputs.density * inputs.size_gross
    effort_gross = inputs.size_gross / inputs.time
    effort_net = functionality / inputs.time
    prod_gross = effort_gross / inputs.size_gross if inputs.size_gross > 0 else math.nan
    return {
        "effort_gross": effort_gross,
        "effort_net": effort_net,
        "productivity_gross": prod_gross,
        "productivity_net": inputs.density / inputs.time,
    }


SUMMARY_COLUMNS = {
    "files_gross": "gross_files",
    "files_net": "net_files",
    "loc_gross": "gross_lines",
    "loc_net": "net_lines",
}
STATISTICS = ("n", "mean", "median", "min", "max", "sd")


def _describe(x: np.ndarray) -> dict[str, float]:
    if x.size == 0:
        return {s: (0 if s == "n" else math.nan) for s in STATISTICS}
    return {
        "n": int(x.size),
        "mean": float(x.mean()),
        "median": float(np.median(x)),
        "min": float(x.min()),
        "max": float(x.max()),
        "sd": float(x.std(ddof=1)) if x.size > 1 else 0.0,
    }


def summary_stats(table: pd.DataFrame, columns: Mapping[str, str] | None = None) -> pd.DataFrame:
    """Tidy per-label and pooled statistics, one row per (group, size, statistic).

    ``columns`` maps an output size name to a column of ``table``; totals
    such as gross lines are derived from miner columns when absent.
    """
    table = with_size_totals(table)
    columns = {k: v for k, v in (SUMMARY_COLUMNS if columns is None else columns).items() if v in table.columns}
    groups = [("all", np.ones(len(table), dtype=bool))]
    if "label" in table.columns:
        groups += [(lab, (table["label"] == lab).to_numpy()) for lab in LABELS]
    rows = []
    for name, mask in groups:
        for size, col in columns.items():
            stats = _describe(table.loc[mask, col].to_numpy(dtype=float))
            rows.extend({"group": name, "size": size, "statistic": s, "value": v} for s, v in stats.items())
    return pd.DataFrame(rows, columns=["group", "size", "statistic", "value"])


def with_size_totals(table: pd.DataFrame) -> pd.DataFrame:
    """Add ``gross_lines``/``net_lines``/``gross_files``/``net_files`` if the
    per-kind miner counts are present and the totals are not."""
    out = table
    for suffix, kind in (("_g", "gross"), ("_n", "net")):
        for base, name in ((LINE_FEATURES, f"{kind}_lines"), (FILE_FEATURES, f"{kind}_files")):
            cols = [f + suffix for f in base]
            if name not in out.columns and all(c in out.columns for c in cols):
                if out is table:
                    out = table.copy()
                out[name] = out[cols].sum(axis=1)
    return out


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation computed from centred sums (symmetric in x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y) or len(x) < 2:
        raise InvalidInputError("need two equally long sequences with >= 2 values")
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy)))
    return float(np.dot(dx, dy)) / denom if denom > 0 else math.nan


def ecdf_frame(values: Iterable[float], column: str = "density") -> pd.DataFrame:
    """ECDF evaluated at every distinct value."""
    e = ecdf(values)
    xs = np.unique(e.values)
    return pd.DataFrame({"column": column, "x": xs, "ecdf": e(xs)})


def stats_bundle(
    table: pd.DataFrame,
    out_dir: str | os.PathLike,
    cond_columns: Sequence[str] = ("gross_lines", "net_lines"),
    predicates: Sequence[SizePredicate] = DEFAULT_PREDICATES,
) -> dict:
    """Write ``ecdf_density.csv``, ``cond_prob.csv`` and ``summary_by_label.csv``
    and return a JSON-ready summary."""
    table = with_size_totals(table)
    os.makedirs(out_dir, exist_ok=True)
    write = {"index": False, "lineterminator": "\n", "float_format": "%.6f"}
    summary: dict = {"n": len(table)}
    if "density" in table.columns and len(table):
        dens = table["density"].to_numpy(dtype=float)
        ecdf_frame(dens).to_csv(os.path.join(out_dir, "ecdf_density.csv"), **write)
        summary["density_one_share"] = density_one_share(dens)
        summary["density_quantiles"] = {
            f"{p:g}": float(q) for p, q in zip(QUANTILE_PROBS, ecdf(dens).quantile(QUANTILE_PROBS))
        }
    if "label" in table.columns and len(table):
        frames = [
            conditional_probability_table(table[c], table["label"], c, predicates).to_frame()
            for c in cond_columns
            if c in table.columns
        ]
        if frames:
            pd.concat(frames).to_csv(os.path.join(out_dir, "cond_prob.csv"), **write)
    summary_stats(table).to_csv(os.path.join(out_dir, "summary_by_label.csv"), **write)
    if {"gross_lines", "net_lines"} <= set(table.columns) and len(table) > 1:
        summary["pearson_net_gross_loc"] = pearson(table["net_lines"], table["gross_lines"])
    summary = {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in summary.items()}
    with open(os.path.join(out_dir, "stats.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return summary
