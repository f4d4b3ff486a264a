"""Divergences between parametric density pairs.

Every public distance is in bits. Internally the integrals and closed forms
are evaluated in nats and converted once on the way out.

P is the class-1 density and Q the class-2 density throughout; ``d12`` is
D(P||Q) and ``d21`` is D(Q||P).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import QuadratureError, UndefinedDistanceError

LN2 = math.log(2.0)

QUAD_RTOL = 1e-8
# Envelope cut-off for truncating infinite tails, relative to the peak.
TAIL_CUTOFF = 1e-14
GOLDEN_TOL = 1e-6

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class Gaussian1D:
    mean1: float
    sd1: float
    mean2: float
    sd2: float

    def __post_init__(self):
        if not (self.sd1 > 0 and self.sd2 > 0):
            raise ValueError("Gaussian standard deviations must be strictly positive")

    def logpdfs(self, x):
        lp = -0.5 * ((x - self.mean1) / self.sd1) ** 2 - math.log(self.sd1 * math.sqrt(2 * math.pi))
        lq = -0.5 * ((x - self.mean2) / self.sd2) ** 2 - math.log(self.sd2 * math.sqrt(2 * math.pi))
        return lp, lq

    def support(self):
        k = math.sqrt(-2.0 * math.log(TAIL_CUTOFF))
        lo = min(self.mean1 - k * self.sd1, self.mean2 - k * self.sd2)
        hi = max(self.mean1 + k * self.sd1, self.mean2 + k * self.sd2)
        return lo, hi, sorted({self.mean1, self.mean2})

    def swapped(self):
        return Gaussian1D(self.mean2, self.sd2, self.mean1, self.sd1)

    def kl_nats(self):
        def kl(m1, s1, m2, s2):
            return math.log(s2 / s1) + (s1 ** 2 + (m1 - m2) ** 2) / (2 * s2 ** 2) - 0.5

        return (
            kl(self.mean1, self.sd1, self.mean2, self.sd2),
            kl(self.mean2, self.sd2, self.mean1, self.sd1),
        )


@dataclass(frozen=True)
class Exponential1D:
    """Exponential densities with scales ``alpha`` (class 1) and ``beta`` (class 2)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("exponential scales must be strictly positive")

    def logpdfs(self, x):
        return -x / self.alpha - math.log(self.alpha), -x / self.beta - math.log(self.beta)

    def support(self):
        return 0.0, -math.log(TAIL_CUTOFF) * max(self.alpha, self.beta), []

    def swapped(self):
        return Exponential1D(self.beta, self.alpha)

    def kl_nats(self):
        a, b = self.alpha, self.beta
        return math.log(b / a) + a / b - 1.0, math.log(a / b) + b / a - 1.0


@dataclass(frozen=True)
class Product:
    """Independent variables; every divergence is the sum over components."""

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("Product needs at least one component")
        for c in comps:
            if not isinstance(c, (Gaussian1D, Exponential1D, Product)):
                raise TypeError(f"unsupported component {c!r}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def repeat(cls, component, d):
        return cls((component,) * d)

    def swapped(self):
        return Product(tuple(c.swapped() for c in self.components))

    @property
    def dims(self):
        return sum(c.dims if isinstance(c, Product) else 1 for c in self.components)

    def flatten(self):
        out = []
        for c in self.components:
            out.extend(c.flatten() if isinstance(c, Product) else [c])
        return out


AnalyticModel = Gaussian1D | Exponential1D | Product


def _leaves(model):
    return model.flatten() if isinstance(model, Product) else [model]


# ---------------------------------------------------------------------------
# numerics


def _quad(func, model):
    lo, hi, points = model.support()
    points = [p for p in points if lo < p < hi] or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, abserr = integrate.quad(func, lo, hi, points=points, epsabs=0.0,
                                       epsrel=QUAD_RTOL / 10, limit=500)
    if abserr > max(QUAD_RTOL * abs(value), 1e-15):
        raise QuadratureError(f"quadrature failed for {model!r}",
                              abserr / abs(value) if value else abserr)
    return value


def _log_overlap(model, t):
    """log of the integral of p^t q^(1-t), in nats."""

    def f(x):
        lp, lq = model.logpdfs(x)
        return math.exp(t * lp + (1.0 - t) * lq)

    return math.log(_quad(f, model))


def _kl_quad(model):
    def f(x):
        lp, lq = model.logpdfs(x)
        return math.exp(lp) * (lp - lq)

    return _quad(f, model)


def maximize_golden(func, a, b, tol=GOLDEN_TOL):
    """Golden-section search for the maximum of a unimodal ``func`` on [a, b].

    Returns ``(x, func(x))`` with the bracket shrunk below ``tol``.
    """
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = func(d)
    x = 0.5 * (a + b)
    return x, func(x)


# ---------------------------------------------------------------------------
# divergences


def kl_closed_form(model):
    """Exact (D(P||Q), D(Q||P)) in bits."""
    d12 = d21 = 0.0
    for leaf in _leaves(model):
        a, b = leaf.kl_nats()
        d12 += a
        d21 += b
    return d12 / LN2, d21 / LN2


def renyi_divergence(model, t):
    """Renyi divergence D_t(P||Q) in bits for 0 <= t <= 1.

    The order-1 value is the Kullback-Leibler limit, integrated directly
    rather than through the 1/(t-1) form. Order 0 is zero for the supported
    models because P and Q share their support.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"Renyi order must lie in [0, 1], got {t}")
    if t == 0.0:
        return 0.0
    total = 0.0
    for leaf in _leaves(model):
        if t == 1.0:
            total += _kl_quad(leaf)
        else:
            total += _log_overlap(leaf, t) / (t - 1.0)
    return total / LN2


def chernoff_divergence(model, t):
    """C_t(P||Q) = (1-t) D_t(P||Q) = -log2 of the integral of p^t q^(1-t)."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"order must lie in [0, 1], got {t}")
    if t in (0.0, 1.0):
        return 0.0
    return -sum(_log_overlap(leaf, t) for leaf in _leaves(model)) / LN2


def bhattacharyya(model):
    return chernoff_divergence(model, 0.5)


def chernoff_information(model, tol=GOLDEN_TOL):
    """Maximum of the Chernoff divergence over t, and its argmax t_c."""
    t_c, c = maximize_golden(lambda t: chernoff_divergence(model, t), 0.0, 1.0, tol)
    return c, t_c


def resistor_average(d12, d21):
    if d12 <= 0 or d21 <= 0:
        raise UndefinedDistanceError(
            f"resistor average needs two positive divergences, got {d12}, {d21}")
    return d12 * d21 / (d12 + d21)


def t_r(d12, d21):
    if d12 <= 0 or d21 <= 0:
        raise UndefinedDistanceError(
            f"t_R needs two positive divergences, got {d12}, {d21}")
    return d12 / (d12 + d21)


def second_order_coefficients(model):
    """(A, B) of the parabolic Renyi fit, pinned to the exact value at t = 1/2."""
    d12, d21 = kl_closed_form(model)
    half = renyi_divergence(model, 0.5)
    half_qp = renyi_divergence(model.swapped(), 0.5)
    return 4.0 * half - 2.0 * d12, 4.0 * half_qp - 2.0 * d21


def second_order_bracket(model):
    """The factor relating D_{1/2} to R(P,Q) under the parabolic fit."""
    d12, d21 = kl_closed_form(model)
    a, b = second_order_coefficients(model)
    return 1.0 + a / (4.0 * d12) + b / (4.0 * d21)


def _harmonic(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = x + y
    return np.divide(x * y, s, out=np.zeros_like(s), where=s != 0)


def chernoff_first_order(d12, d21, t):
    """Chernoff divergence with both Renyi curves replaced by their chords."""
    t = np.asarray(t, dtype=float)
    return _harmonic(t * d12, (1.0 - t) * d21)


def chernoff_second_order(d12, d21, a_coef, b_coef, t):
    t = np.asarray(t, dtype=float)
    return _harmonic(t * d12 + a_coef * t * (1 - t), (1.0 - t) * d21 + b_coef * t * (1 - t))


# ---------------------------------------------------------------------------
# curve


@dataclass(frozen=True)
class DivergenceCurve:
    t_grid: np.ndarray
    renyi_pq: np.ndarray
    renyi_qp: np.ndarray
    chernoff: np.ndarray
    d12: float
    d21: float
    r: float
    t_r: float
    chernoff_info: float
    t_c: float
    bhattacharyya: float
    a_coef: float
    b_coef: float
    model: object = field(default=None, compare=False)

    @property
    def bracket(self):
        return 1.0 + self.a_coef / (4.0 * self.d12) + self.b_coef / (4.0 * self.d21)

    @property
    def chernoff_second_order(self):
        return chernoff_second_order(self.d12, self.d21, self.a_coef, self.b_coef, self.t_grid)

    @property
    def chernoff_first_order(self):
        return chernoff_first_order(self.d12, self.d21, self.t_grid)

    def summary(self):
        return {
            "d12": self.d12, "d21": self.d21, "r": self.r, "t_r": self.t_r,
            "chernoff_info": self.chernoff_info, "t_c": self.t_c,
            "bhattacharyya": self.bhattacharyya, "a_coef": self.a_coef,
            "b_coef": self.b_coef, "bracket": self.bracket,
        }


def divergence_curve(model, n_grid=101):
    if n_grid < 3:
        raise ValueError("n_grid must be at least 3")
    ts = np.linspace(0.0, 1.0, n_grid)
    swapped = model.swapped()
    pq = np.array([renyi_divergence(model, t) for t in ts])
    qp = np.array([renyi_divergence(swapped, 1.0 - t) for t in ts])
    ch = np.array([chernoff_divergence(model, t) for t in ts])
    d12, d21 = kl_closed_form(model)
    c, t_c = chernoff_information(model)
    a, b = second_order_coefficients(model)
    return DivergenceCurve(
        t_grid=ts, renyi_pq=pq, renyi_qp=qp, chernoff=ch,
        d12=d12, d21=d21, r=resistor_average(d12, d21), t_r=t_r(d12, d21),
        chernoff_info=c, t_c=t_c, bhattacharyya=bhattacharyya(model),
        a_coef=a, b_coef=b, model=model,
    )


CURVE_COLUMNS = ("t", "renyi_pq", "renyi_qp", "chernoff")
EXTENDED_COLUMNS = CURVE_COLUMNS + ("chernoff_first_order", "chernoff_second_order")


def write_curve_table(curve, fh, delimiter=",", extended=False):
    """Write the plot-ready curve, one row per grid point, 9 significant digits."""
    cols = [curve.t_grid, curve.renyi_pq, curve.renyi_qp, curve.chernoff]
    header = CURVE_COLUMNS
    if extended:
        cols += [curve.chernoff_first_order, curve.chernoff_second_order]
        header = EXTENDED_COLUMNS
    writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
    writer.writerow(header)
    for row in zip(*cols):
        writer.writerow([f"{v:.9g}" for v in row])
