"""Nearest-neighbour estimates of the two Kullback-Leibler divergences.

Every variable is first mapped onto bin indices (equal-frequency bins on the
pooled column for continuous data, category indices for discrete data), then
jittered by a Uniform[0, 1) offset so that discrete, continuous and mixed
tables all become continuous point clouds. The class distance indicator
CDI(1,2) is the first-neighbour log-distance-ratio estimate of D(P||Q); the
CDR is the parallel-resistor combination of the two CDIs.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import InsufficientDataError
from .table import DISCRETE

MAX_DEFAULT_BINS = 256


def default_bins(n):
    return min(MAX_DEFAULT_BINS, math.ceil(math.sqrt(n)))


@dataclass(frozen=True)
class EstimatorConfig:
    bins_per_variable: int | None = None  # None: ceil(sqrt(N)) capped at 256
    neighbor_order_k: int = 1
    repeats_m: int = 10
    seed: int = 0
    distance_floor: float = 1e-12

    def __post_init__(self):
        if self.bins_per_variable is not None and self.bins_per_variable < 2:
            raise ValueError("bins_per_variable must be at least 2")
        if self.repeats_m < 1:
            raise ValueError("repeats_m must be at least 1")
        if self.neighbor_order_k < 1:
            raise ValueError("neighbor_order_k must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def bins_for(self, n):
        return self.bins_per_variable or default_bins(n)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class DivergenceEstimate:
    cdi12: float
    cdi21: float
    cdr: float | None
    se12: float
    se21: float
    repeats_m: int
    config: EstimatorConfig
    n1: int = 0
    n2: int = 0
    d: int = 0
    bins: int = 0
    replicates12: tuple = field(default=(), repr=False)
    replicates21: tuple = field(default=(), repr=False)

    @property
    def cdr_defined(self):
        return self.cdr is not None

    @property
    def t_r(self):
        if not self.cdr_defined:
            return None
        return self.cdi12 / (self.cdi12 + self.cdi21)

    def to_dict(self):
        return {
            "cdi12": self.cdi12, "cdi21": self.cdi21, "cdr": self.cdr,
            "se12": self.se12, "se21": self.se21, "t_r": self.t_r,
            "repeats_m": self.repeats_m, "n1": self.n1, "n2": self.n2,
            "d": self.d, "bins": self.bins, "config": self.config.to_dict(),
        }


# ---------------------------------------------------------------------------
# binning


def _equal_frequency_cuts(column, bins):
    """Return the sorted distinct values, their inverse index, and the chosen
    cut positions (cut j sits between distinct values j and j+1)."""
    column = np.asarray(column, dtype=float)
    uniq, inverse, counts = np.unique(column, return_inverse=True, return_counts=True)
    if len(uniq) <= bins:
        return uniq, inverse, np.arange(len(uniq) - 1)
    cum = np.cumsum(counts)[:-1]
    n = column.size
    chosen = set()
    for i in range(1, bins):
        chosen.add(int(np.argmin(np.abs(cum - i * n / bins))))
    return uniq, inverse, np.array(sorted(chosen), dtype=int)


def bin_equal_entropy(column, bins):
    """Interior bin edges giving each bin as equal a count as ties allow.

    Equal counts maximise the Shannon entropy of the binned column. Edges
    fall midway between neighbouring distinct values, so tied values never
    straddle an edge; with no more distinct values than ``bins`` there is
    one bin per distinct value.
    """
    if bins < 2:
        raise ValueError("bins must be at least 2")
    uniq, _, cuts = _equal_frequency_cuts(column, bins)
    return 0.5 * (uniq[cuts] + uniq[cuts + 1])


def bin_codes(column, bins):
    """Bin index of every entry, assigned through the distinct-value ranks."""
    uniq, inverse, cuts = _equal_frequency_cuts(column, bins)
    per_value = np.searchsorted(cuts, np.arange(len(uniq)), side="left")
    return per_value[inverse].astype(float)


def encode_bins(dataset, config):
    """Integer lattice coordinates of every row before jitter."""
    bins = config.bins_for(dataset.n)
    cols = []
    for j, var in enumerate(dataset.variables):
        if var.kind == DISCRETE:
            cols.append(dataset.values[:, j].astype(float))
        else:
            cols.append(bin_codes(dataset.values[:, j], bins))
    return np.column_stack(cols)


def jitter_encode(dataset, config, replicate=0, codes=None):
    """Point clouds (class 1, class 2) for one jitter replicate.

    Replicate ``r`` draws its offsets from ``seed + r``; offsets follow the
    table's row order, so relabelling the classes reuses the same points.
    """
    if codes is None:
        codes = encode_bins(dataset, config)
    rng = np.random.default_rng(config.seed + replicate)
    points = codes + rng.random(codes.shape)
    return points[dataset.labels == 1], points[dataset.labels == 2]


# ---------------------------------------------------------------------------
# estimator


def _check_cloud(cloud, need, what):
    cloud = np.asarray(cloud, dtype=float)
    if cloud.ndim == 1:
        cloud = cloud[:, None]
    if cloud.shape[0] < need:
        raise InsufficientDataError(f"{what} has {cloud.shape[0]} points; need at least {need}")
    return cloud


def _kth(tree, points, k):
    return tree.query(points, k=[k])[0][:, 0]


def _cdi_from_trees(own_tree, other_tree, cloud, n_other, k, floor):
    n, d = cloud.shape
    lam_own = np.maximum(_kth(own_tree, cloud, k + 1), floor)
    lam_other = np.maximum(_kth(other_tree, cloud, k), floor)
    return d / n * float(np.sum(np.log2(lam_other / lam_own))) + math.log2(n_other / (n - 1))


def cdi(cloud1, cloud2, k=1, distance_floor=1e-12):
    """CDI(1,2), the estimate of D(P||Q) in bits, from two point clouds.

    Uses exact Euclidean k-th neighbour distances; the same-class search
    excludes the query point itself.
    """
    cloud1 = _check_cloud(cloud1, max(2, k + 1), "class 1")
    cloud2 = _check_cloud(cloud2, k, "class 2")
    if cloud1.shape[1] != cloud2.shape[1]:
        raise ValueError("clouds differ in dimension")
    return _cdi_from_trees(cKDTree(cloud1), cKDTree(cloud2), cloud1, cloud2.shape[0],
                           k, distance_floor)


def cdi_pair(cloud1, cloud2, k=1, distance_floor=1e-12):
    """(CDI(1,2), CDI(2,1)) sharing one tree per class."""
    cloud1 = _check_cloud(cloud1, max(2, k + 1), "class 1")
    cloud2 = _check_cloud(cloud2, max(2, k + 1), "class 2")
    t1, t2 = cKDTree(cloud1), cKDTree(cloud2)
    return (
        _cdi_from_trees(t1, t2, cloud1, cloud2.shape[0], k, distance_floor),
        _cdi_from_trees(t2, t1, cloud2, cloud1.shape[0], k, distance_floor),
    )


def cdr_from(cdi12, cdi21):
    """Parallel-resistor combination, or None when either input is not positive."""
    if cdi12 > 0 and cdi21 > 0:
        return cdi12 * cdi21 / (cdi12 + cdi21)
    return None


def _stderr(x):
    if len(x) < 2:
        return float("nan")
    return float(np.std(x, ddof=1) / math.sqrt(len(x)))


def estimate(dataset, config=None):
    """Average CDI(1,2), CDI(2,1) over ``repeats_m`` jitter replicates."""
    config = config or EstimatorConfig()
    if dataset.n1 < 2 or dataset.n2 < 2:
        raise InsufficientDataError(
            f"need at least 2 rows per class, have {dataset.n1} and {dataset.n2}")
    codes = encode_bins(dataset, config)
    r12, r21 = [], []
    for rep in range(config.repeats_m):
        c1, c2 = jitter_encode(dataset, config, rep, codes=codes)
        a, b = cdi_pair(c1, c2, config.neighbor_order_k, config.distance_floor)
        r12.append(a)
        r21.append(b)
    m12, m21 = float(np.mean(r12)), float(np.mean(r21))
    return DivergenceEstimate(
        cdi12=m12, cdi21=m21, cdr=cdr_from(m12, m21),
        se12=_stderr(r12), se21=_stderr(r21), repeats_m=config.repeats_m,
        config=config, n1=dataset.n1, n2=dataset.n2, d=dataset.d,
        bins=config.bins_for(dataset.n),
        replicates12=tuple(r12), replicates21=tuple(r21),
    )
