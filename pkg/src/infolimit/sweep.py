"""Class-imbalance sweeps, the linear leakage-rate model and the kappa audit.

The leakage-rate model writes both rates as straight lines in the class-1
fraction f1::

    K12 = delta1 + (D21 - delta1) * f1
    K21 = delta2 + (D12 - delta2) * (1 - f1)

with 0 <= delta1 <= D21 and 0 <= delta2 <= D12.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import nnls

from .classify import ClassifierSpec, cross_validate, default_kind
from .confusion import ConfusionCounts, RateSummary, kappa_from_rates, rates
from .datagen import subsample_to_f1
from .errors import InfeasibleImbalanceError, InsufficientSweepError
from .knn import DivergenceEstimate, EstimatorConfig, estimate

DEFAULT_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))
BALANCE_REGION = (0.2, 0.8)
VERDICT_TOLERANCE = 0.08
# Leakage rates closer than this (bits) keep |K - K_W| small.
RATE_GAP_REGIME = 0.6


@dataclass(frozen=True)
class SweepPoint:
    f1: float
    counts: ConfusionCounts
    rates: RateSummary
    divergence: DivergenceEstimate | None
    f1_target: float | None = None

    def row(self):
        out = {"f1_target": self.f1_target, "f1": self.f1}
        out.update(self.counts.to_dict())
        r = self.rates
        out.update(kappa=r.kappa, k=r.k, k12=r.k12, k21=r.k21, k_w=r.k_w, k_max=r.k_max,
                   capped12=r.capped12, capped21=r.capped21, cappedK=r.cappedK)
        d = self.divergence
        if d is not None:
            out.update(cdi12=d.cdi12, cdi21=d.cdi21, cdr=d.cdr, se12=d.se12, se21=d.se21,
                       kappa_limit=kappa_limit(d.cdr) if d.cdr_defined else None)
        return out


def default_grid(native_f1=None):
    grid = set(DEFAULT_GRID)
    if native_f1 is not None and not any(abs(native_f1 - g) < 1e-9 for g in grid):
        grid.add(native_f1)
    return sorted(grid)


def sweep(dataset, f1_grid=None, classifier=None, estimator=None, seed=0, progress=None):
    """Subsample, cross-validate and estimate at every feasible grid value.

    Grid value ``i`` (in ascending order) is subsampled with seed ``seed + i``.
    Infeasible values are skipped with a warning.
    """
    grid = sorted(f1_grid) if f1_grid is not None else default_grid(dataset.f1)
    classifier = classifier or ClassifierSpec(default_kind(dataset))
    estimator = estimator or EstimatorConfig()
    points = []
    for i, target in enumerate(grid):
        try:
            sub = subsample_to_f1(dataset, target, seed + i)
        except InfeasibleImbalanceError as exc:
            warnings.warn(f"skipping f1 = {target}: {exc}")
            continue
        counts = cross_validate(sub, classifier)
        point = SweepPoint(f1=sub.f1, counts=counts, rates=rates(counts),
                           divergence=estimate(sub, estimator), f1_target=target)
        points.append(point)
        if progress is not None:
            progress(point)
    return points


# ---------------------------------------------------------------------------
# fitting


@dataclass(frozen=True)
class FitResult:
    delta1: float
    d21_fit: float
    delta2: float
    d12_fit: float
    se_delta1: float
    se_d21: float
    se_delta2: float
    se_d12: float
    f_b: float
    f_cross: float | None
    crosses: bool
    t_r: float
    residual_rms: float
    n_points12: int
    n_points21: int
    weighting: str
    anchored: bool

    def k12(self, f1):
        return self.delta1 + (self.d21_fit - self.delta1) * np.asarray(f1, dtype=float)

    def k21(self, f1):
        return self.delta2 + (self.d12_fit - self.delta2) * (1.0 - np.asarray(f1, dtype=float))

    def to_dict(self):
        return asdict(self)


def _fit_line(x, y, w):
    """Non-negative weighted fit of y = c0 + c1 x; returns params, covariance, residuals."""
    A = np.column_stack([np.ones_like(x), x])
    sw = np.sqrt(w)
    params, _ = nnls(A * sw[:, None], y * sw)
    resid = y - A @ params
    dof = len(x) - 2
    s2 = float(np.sum(w * resid ** 2) / dof) if dof > 0 else 0.0
    cov = s2 * np.linalg.pinv((A * w[:, None]).T @ A)
    return params, cov, resid


def _line_data(points, which, f1_range):
    xs, ys, ws = [], [], []
    for p in points:
        if f1_range is not None and not f1_range[0] - 1e-12 <= p.f1 <= f1_range[1] + 1e-12:
            continue
        r = p.rates
        if which == 12:
            if r.capped12:
                continue
            xs.append(p.f1), ys.append(r.k12), ws.append(p.counts.n1_leak)
        else:
            if r.capped21:
                continue
            xs.append(1.0 - p.f1), ys.append(r.k21), ws.append(p.counts.n2_leak)
    return np.array(xs, float), np.array(ys, float), np.array(ws, float)


def fit_leakage_model(points, anchors=None, weighting="counts", f1_range=None):
    """Fit both leakage-rate lines under their box constraints.

    ``weighting="counts"`` weights each rate by its leaked count, the inverse
    variance of a log count; ``"none"`` is ordinary least squares. Capped
    rates are excluded. ``anchors=(cdi12, cdi21)`` adds pseudo-points
    K21 = cdi12 at f1 = 0 and K12 = cdi21 at f1 = 1, each weighted like an
    average sweep point of its line.
    """
    if weighting not in ("counts", "none"):
        raise ValueError(f"unknown weighting {weighting!r}")
    fits = {}
    resid_all = []
    for which in (12, 21):
        x, y, w = _line_data(points, which, f1_range)
        if len(x) < 3:
            raise InsufficientSweepError(
                f"K{which} line has {len(x)} usable points; need at least 3")
        if weighting == "none":
            w = np.ones_like(w)
        if anchors is not None:
            # x is f1 for the K12 line and f2 for the K21 line; both anchors sit at x = 1
            target = anchors[1] if which == 12 else anchors[0]
            x = np.append(x, 1.0)
            y = np.append(y, target)
            w = np.append(w, w.mean())
        params, cov, resid = _fit_line(x, y, w)
        fits[which] = (params, cov, len(x) - (anchors is not None))
        resid_all.append(resid)

    (a, ca, n12), (c, cc, n21) = fits[12], fits[21]
    one = np.ones(2)
    delta1, d21 = float(a[0]), float(a.sum())
    delta2, d12 = float(c[0]), float(c.sum())
    partial = FitResult(
        delta1=delta1, d21_fit=d21, delta2=delta2, d12_fit=d12,
        se_delta1=math.sqrt(max(ca[0, 0], 0.0)), se_d21=math.sqrt(max(one @ ca @ one, 0.0)),
        se_delta2=math.sqrt(max(cc[0, 0], 0.0)), se_d12=math.sqrt(max(one @ cc @ one, 0.0)),
        f_b=float("nan"), f_cross=None, crosses=False,
        t_r=d12 / (d12 + d21) if d12 + d21 > 0 else float("nan"),
        residual_rms=float(np.sqrt(np.mean(np.concatenate(resid_all) ** 2))),
        n_points12=n12, n_points21=n21, weighting=weighting, anchored=anchors is not None,
    )
    crossing = line_crossing(partial)
    return FitResult(**{**asdict(partial), "f_b": balance_point(partial),
                        "f_cross": crossing, "crosses": crossing is not None})


def balance_point(fit):
    """Approximate f1 where the two leakage rates are equal."""
    d12, d21, t1, t2 = fit.d12_fit, fit.d21_fit, fit.delta1, fit.delta2
    s = d12 + d21
    if s <= 0 or d12 <= 0:
        return float("nan")
    return d12 / s * (1.0 + (t1 + t2) / s - t1 / d12)


def line_crossing(fit):
    """Exact f1 where the fitted lines meet, or None for parallel lines."""
    slope12 = fit.d21_fit - fit.delta1
    slope21 = fit.d12_fit - fit.delta2
    den = slope12 + slope21
    if den <= 0:
        return None
    return (fit.d12_fit - fit.delta1) / den


def predict_kappa_curve(fit, f1_grid):
    return [(float(f), kappa_from_rates(float(f), float(fit.k12(f)), float(fit.k21(f))))
            for f in f1_grid]


# ---------------------------------------------------------------------------
# audit


def kappa_limit(cdr):
    return 1.0 - 2.0 ** (-cdr)


@dataclass(frozen=True)
class Verdict:
    verdict: str
    kappa_observed: float
    cdr: float | None
    kappa_limit: float | None
    gap: float | None
    tolerance: float

    def to_dict(self):
        return asdict(self)


def verdict(kappa_observed, divergence, tolerance=VERDICT_TOLERANCE):
    """Compare a measured kappa with 1 - 2^-CDR."""
    if not divergence.cdr_defined:
        return Verdict("no-verdict", kappa_observed, None, None, None, tolerance)
    limit = kappa_limit(divergence.cdr)
    gap = limit - kappa_observed
    if abs(gap) <= tolerance:
        label = "at-limit"
    elif gap > tolerance:
        label = "below-limit"
    else:
        label = "above-limit-check-estimator"
    return Verdict(label, kappa_observed, divergence.cdr, limit, gap, tolerance)


def rate_relation_residuals(points, max_gap=RATE_GAP_REGIME, f1_range=None):
    """(f1, |K - K_W|) for points whose leakage rates differ by at most ``max_gap``."""
    out = []
    for p in points:
        r = p.rates
        if r.capped12 or r.capped21 or math.isnan(r.k):
            continue
        if f1_range is not None and not f1_range[0] - 1e-12 <= p.f1 <= f1_range[1] + 1e-12:
            continue
        if abs(r.k12 - r.k21) <= max_gap:
            out.append((p.f1, abs(r.k - r.k_w)))
    return out
