"""Nearest-neighbor spacing statistics and level clustering.

Spacings dE_i = E_{i+1} - E_i of a sorted spectrum, normalized by their
mean, are compared against the two canonical references:

    Poisson          P(s) = exp(-s)            uncorrelated levels
    Wigner surmise   P(s) = (pi/2) s exp(-pi s^2 / 4)   level repulsion

Agreement is scored by the Kolmogorov-Smirnov distance between the
empirical spacing distribution and each reference; the paper's visual
histogram comparison maps onto D_Poisson vs D_Wigner.  Histogram
frequencies are normalized to unit area so the reference curves overlay
directly (the raw counts stay available).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: spacings below this relative tolerance count as one level (numerical
#: duplicates would spike the s=0 bin)
LEVEL_DEDUP_RTOL = 1e-9


def poisson_pdf(s):
    """exp(-s); spacing density of uncorrelated levels."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("spacings must be nonnegative")
    out = np.exp(-s)
    return out if out.ndim else float(out)


def wigner_pdf(s):
    """(pi/2) s exp(-pi s^2/4); spacing density with level repulsion."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("spacings must be nonnegative")
    out = (math.pi / 2.0) * s * np.exp(-math.pi * s**2 / 4.0)
    return out if out.ndim else float(out)


def poisson_cdf(s):
    s = np.asarray(s, dtype=float)
    return 1.0 - np.exp(-s)


def wigner_cdf(s):
    s = np.asarray(s, dtype=float)
    return 1.0 - np.exp(-math.pi * s**2 / 4.0)


def ks_distance(samples: np.ndarray, cdf) -> float:
    """Kolmogorov-Smirnov distance of a sample to a reference CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n == 0:
        raise ValueError("empty sample")
    f = cdf(x)
    up = np.arange(1, n + 1) / n - f
    dn = f - np.arange(0, n) / n
    return float(max(up.max(), dn.max()))


@dataclass
class SpacingSeries:
    """Deduplicated sorted levels with mean-normalized spacings."""

    levels: np.ndarray = field(repr=False)
    spacings: np.ndarray = field(repr=False)
    normalized: np.ndarray = field(repr=False)
    mean_spacing: float = 0.0
    window: tuple | None = None

    @classmethod
    def from_levels(cls, levels, window=None, dedup_rtol=LEVEL_DEDUP_RTOL):
        lv = np.sort(np.asarray(levels, dtype=float))
        if window is not None:
            lv = lv[(lv >= window[0]) & (lv <= window[1])]
        if len(lv) >= 2:
            keep = np.concatenate(
                ([True], np.diff(lv) > dedup_rtol * np.maximum(1.0, np.abs(lv[1:])))
            )
            lv = lv[keep]
        if len(lv) < 2:
            raise ValueError(f"need at least 2 distinct levels, got {len(lv)}")
        de = np.diff(lv)
        mean = float(de.mean())
        return cls(levels=lv, spacings=de, normalized=de / mean,
                   mean_spacing=mean, window=window)


@dataclass
class SpacingHistogram:
    """Binned normalized spacings with reference curves and KS distances."""

    edges: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    freq: np.ndarray = field(repr=False)        # unit-area density
    poisson_ref: np.ndarray = field(repr=False)  # at bin centers
    wigner_ref: np.ndarray = field(repr=False)
    d_poisson: float = 0.0
    d_wigner: float = 0.0
    n_spacings: int = 0
    series: SpacingSeries | None = field(repr=False, default=None)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def nnsd(levels, window=None, bins: int = 20, bin_range: float = 4.0,
         min_levels: int = 20) -> SpacingHistogram:
    """Nearest-neighbor spacing distribution of a level list.

    Refuses samples with fewer than `min_levels` levels in the window.  The
    nominal histogram covers [0, bin_range] with `bins` equal bins, extended
    by whole bins when spacings exceed the range, so counts always sum to
    the number of spacings.
    """
    series = SpacingSeries.from_levels(levels, window=window)
    n = len(series.levels)
    if n < min_levels:
        raise ValueError(f"too few levels for spacing statistics: "
                         f"got {n}, need at least {min_levels}")
    s = series.normalized
    width = bin_range / bins
    top = max(bin_range, float(s.max()) + width)
    nbins = int(math.ceil(top / width - 1e-9))
    edges = np.arange(nbins + 1) * width
    counts, _ = np.histogram(s, bins=edges)
    freq = counts / (len(s) * width)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return SpacingHistogram(
        edges=edges,
        counts=counts,
        freq=freq,
        poisson_ref=poisson_pdf(centers),
        wigner_ref=wigner_pdf(centers),
        d_poisson=ks_distance(s, poisson_cdf),
        d_wigner=ks_distance(s, wigner_cdf),
        n_spacings=len(s),
        series=series,
    )


@dataclass
class LevelCluster:
    size: int
    centroid: float
    lo: float
    hi: float


def cluster_detection(levels, gap_factor: float = 3.0) -> list[LevelCluster]:
    """Partition levels into clusters split at spacings > gap_factor * mean.

    In a perpendicular field the clusters sit on the Larmor ladder; their
    centroid differences expose the omega_L = B/2 spacing.
    """
    lv = np.sort(np.asarray(levels, dtype=float))
    if len(lv) == 0:
        raise ValueError("need at least one level")
    if gap_factor <= 1.0:
        raise ValueError(f"gap_factor must exceed 1, got {gap_factor}")
    if len(lv) == 1:
        return [LevelCluster(size=1, centroid=float(lv[0]), lo=float(lv[0]), hi=float(lv[0]))]
    de = np.diff(lv)
    cut = gap_factor * de.mean()
    breaks = np.flatnonzero(de > cut)
    out = []
    start = 0
    for b in np.concatenate((breaks, [len(lv) - 1])):
        chunk = lv[start:b + 1]
        out.append(LevelCluster(size=len(chunk), centroid=float(chunk.mean()),
                                lo=float(chunk[0]), hi=float(chunk[-1])))
        start = b + 1
    return out


def cluster_gaps(clusters: list[LevelCluster]) -> np.ndarray:
    """Centroid-to-centroid distances of consecutive clusters."""
    c = np.array([cl.centroid for cl in clusters])
    return np.diff(c)


def dominant_cluster_gap(clusters: list[LevelCluster]) -> float:
    """Median centroid gap (robust ladder-spacing estimate)."""
    gaps = cluster_gaps(clusters)
    if len(gaps) == 0:
        raise ValueError("need at least two clusters")
    return float(np.median(gaps))
