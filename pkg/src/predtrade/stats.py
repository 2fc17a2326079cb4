"""Histograms and the small statistics used on survivor tables."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    underflow: int = 0
    overflow: int = 0

    @classmethod
    def empty(cls, lo: float, hi: float, n_bins: int) -> "Histogram":
        return cls(np.linspace(lo, hi, n_bins + 1), np.zeros(n_bins, dtype=np.int64))

    @classmethod
    def of(cls, values, lo: float, hi: float, n_bins: int) -> "Histogram":
        """Bins are half-open [lo_k, hi_k); values >= hi overflow, values < lo underflow."""
        h = cls.empty(lo, hi, n_bins)
        h.add(values)
        return h

    def add(self, values) -> None:
        v = np.asarray(values, dtype=float).ravel()
        edges = self.bin_edges
        k = np.searchsorted(edges, v, side="right") - 1
        under = k < 0
        over = k >= len(self.counts)
        self.underflow += int(under.sum())
        self.overflow += int(over.sum())
        np.add.at(self.counts, k[~under & ~over], 1)

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow

    def full_counts(self) -> np.ndarray:
        return np.concatenate([[self.underflow], self.counts, [self.overflow]])

    def mass_below(self, x: float) -> int:
        """Count of entries known to lie strictly below ``x``; ``x`` must be a bin edge."""
        k = np.flatnonzero(np.isclose(self.bin_edges, x, rtol=0, atol=1e-12 * max(1.0, abs(x))))
        if k.size == 0:
            raise ValueError(f"{x} is not a bin edge")
        return self.underflow + int(self.counts[:k[0]].sum())


def ks_distance(h1: Histogram, h2: Histogram) -> float:
    """Largest gap between the normalized cumulative counts of two histograms."""
    if h1.bin_edges.shape != h2.bin_edges.shape or not np.array_equal(h1.bin_edges, h2.bin_edges):
        raise ValueError("histograms have different bin edges")
    if h1.total == 0 or h2.total == 0:
        raise ValueError("empty histogram")
    c1 = np.cumsum(h1.full_counts()) / h1.total
    c2 = np.cumsum(h2.full_counts()) / h2.total
    return float(np.max(np.abs(c1 - c2)))


def against_odds_fraction(deltas) -> float:
    d = np.asarray(deltas, dtype=float).ravel()
    if d.size == 0:
        raise ValueError("no wealth differences given")
    return float(np.count_nonzero(d < 0) / d.size)


def interquartile_range(values) -> float:
    q75, q25 = np.percentile(np.asarray(values, dtype=float), [75, 25])
    return float(q75 - q25)


def mean_stderr(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return float(v.mean()), 0.0
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size))
