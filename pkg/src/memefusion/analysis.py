"""Dataset analyses: phi correlation between the hateful label and sensitive
tags, and the incidence table of label versus number of sensitive categories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tagging import CATEGORIES

COLUMN_NAMES = ("hateful",) + CATEGORIES
INCIDENCE_HEADER = "label,0,1,2,3,4+"
INCIDENCE_COLS = 5  # counts 0..3 plus a 4+ bucket


def phi(a, b) -> float:
    """Phi coefficient of two binary vectors; NaN when a marginal is empty.

    Equals the Pearson correlation of the 0/1 vectors wherever defined.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    n11 = float(np.sum((a == 1) & (b == 1)))
    n10 = float(np.sum((a == 1) & (b == 0)))
    n01 = float(np.sum((a == 0) & (b == 1)))
    n00 = float(np.sum((a == 0) & (b == 0)))
    denom = math.sqrt((n11 + n10) * (n01 + n00) * (n11 + n01) * (n10 + n00))
    if denom == 0.0:
        return math.nan
    return (n11 * n00 - n10 * n01) / denom


def correlation_matrix(labels, flags) -> np.ndarray:
    """Symmetric 8x8 phi matrix over (label, 7 tag flags).

    Cells with a constant column are NaN, including the diagonal.
    """
    labels = np.asarray(labels, dtype=np.int64)
    flags = np.asarray(flags, dtype=np.int64)
    if flags.shape != (len(labels), len(CATEGORIES)):
        raise ValueError(f"flags must be (n, {len(CATEGORIES)}), got {flags.shape}")
    columns = np.column_stack([labels, flags])
    k = columns.shape[1]
    out = np.full((k, k), math.nan)
    for i in range(k):
        for j in range(i, k):
            out[i, j] = out[j, i] = phi(columns[:, i], columns[:, j])
    return out


@dataclass(frozen=True)
class IncidenceTable:
    """2x5 counts: label (false/true) by number of sensitive categories
    (0, 1, 2, 3, 4+)."""
    counts: np.ndarray

    def __post_init__(self):
        if self.counts.shape != (2, INCIDENCE_COLS):
            raise ValueError(f"counts must be (2, {INCIDENCE_COLS}), got {self.counts.shape}")

    def total(self) -> int:
        return int(self.counts.sum())

    def hateful_share(self, col: int) -> float:
        """Fraction of memes with this category count that are hateful;
        NaN for an empty column."""
        col_total = self.counts[:, col].sum()
        if col_total == 0:
            return math.nan
        return float(self.counts[1, col] / col_total)


def incidence(labels, flags) -> IncidenceTable:
    labels = np.asarray(labels, dtype=np.int64)
    flags = np.asarray(flags, dtype=np.int64)
    if len(labels) == 0:
        return IncidenceTable(np.zeros((2, INCIDENCE_COLS), dtype=np.int64))
    if flags.shape != (len(labels), len(CATEGORIES)):
        raise ValueError(f"flags must be (n, {len(CATEGORIES)}), got {flags.shape}")
    n_categories = np.minimum(flags.sum(axis=1), INCIDENCE_COLS - 1)
    counts = np.zeros((2, INCIDENCE_COLS), dtype=np.int64)
    np.add.at(counts, (labels, n_categories), 1)
    return IncidenceTable(counts)


def _fmt_cell(value: float) -> str:
    return "NA" if math.isnan(value) else f"{value:.3f}"


def incidence_csv(inc: IncidenceTable) -> str:
    lines = [INCIDENCE_HEADER]
    for row, name in enumerate(("false", "true")):
        lines.append(name + "," + ",".join(str(int(c)) for c in inc.counts[row]))
    return "\n".join(lines) + "\n"


def correlation_csv(corr: np.ndarray) -> str:
    lines = ["," + ",".join(COLUMN_NAMES)]
    for name, row in zip(COLUMN_NAMES, corr):
        lines.append(name + "," + ",".join(_fmt_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def report(inc: IncidenceTable, corr: np.ndarray) -> str:
    """Deterministic plain-text report over both analyses."""
    parts = ["# Incidence: label x number of sensitive categories", ""]
    parts.append(incidence_csv(inc).rstrip("\n"))
    parts.append("")
    col_names = ("0", "1", "2", "3", "4+")
    for col, name in enumerate(col_names):
        share = inc.hateful_share(col)
        n_hateful = int(inc.counts[1, col])
        if math.isnan(share):
            parts.append(f"hateful share at {name} categories: NA")
        else:
            parts.append(f"hateful share at {name} categories: "
                         f"{100.0 * share:.2f}% (N = {n_hateful})")
    parts += ["", "# Phi correlation: hateful label and sensitive tags", ""]
    parts.append(correlation_csv(corr).rstrip("\n"))
    return "\n".join(parts) + "\n"
