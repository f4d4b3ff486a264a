"""Two-class confusion matrix algebra in bits.

Rows are the true class. ``n1_leak`` counts class-1 entries assigned to
class 2 and ``n2_leak`` class-2 entries assigned to class 1.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from .errors import DegenerateMatrixError


@dataclass(frozen=True)
class ConfusionCounts:
    n1_true: int
    n1_leak: int
    n2_leak: int
    n2_true: int

    def __post_init__(self):
        for name in ("n1_true", "n1_leak", "n2_leak", "n2_true"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("each class needs at least one entry")

    @classmethod
    def parse(cls, text):
        """Read the ``n1_true,n1_leak,n2_leak,n2_true`` text form."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected 4 comma-separated counts, got {text!r}")
        return cls(*(int(p) for p in parts))

    def __str__(self):
        return f"{self.n1_true},{self.n1_leak},{self.n2_leak},{self.n2_true}"

    @property
    def n1(self):
        return self.n1_true + self.n1_leak

    @property
    def n2(self):
        return self.n2_true + self.n2_leak

    @property
    def n(self):
        return self.n1 + self.n2

    @property
    def f1(self):
        return self.n1 / self.n

    def swapped(self):
        return ConfusionCounts(self.n2_true, self.n2_leak, self.n1_leak, self.n1_true)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class RateSummary:
    kappa: float
    k: float
    k12: float
    k21: float
    k_w: float
    k_max: float
    f1: float
    capped12: bool
    capped21: bool
    cappedK: bool

    def to_dict(self):
        return asdict(self)


def _agreement(c):
    n = c.n
    p_o = Fraction(c.n1_true + c.n2_true, n)
    p_e = Fraction(c.n1, n) * Fraction(c.n1_true + c.n2_leak, n) \
        + Fraction(c.n2, n) * Fraction(c.n2_true + c.n1_leak, n)
    return p_o, p_e


def kappa(counts):
    """Cohen's kappa, evaluated exactly in rationals and rounded once."""
    p_o, p_e = _agreement(counts)
    if p_e == 1:
        if p_o == 1:
            return 1.0
        raise DegenerateMatrixError(f"chance agreement is 1 for {counts}")
    return float((p_o - p_e) / (1 - p_e))


def k_max(n, f1):
    """Largest measurable leakage rate: one leaked entry."""
    return math.log2(n) + math.log2(f1 * (1.0 - f1))


def average_rate(kappa_value, cap):
    """K = -log2(1 - kappa), capped at ``cap`` for kappa = 1; NaN below zero."""
    if kappa_value < 0:
        return float("nan"), False
    if kappa_value >= 1:
        return cap, True
    return -math.log2(1.0 - kappa_value), False


def rates(counts):
    c = counts
    f1 = c.f1
    # log2(N f1 f2) from the integers, so swapping classes gives the same cap
    cap = math.log2(c.n1 * c.n2 / c.n)
    scale = Fraction(c.n, c.n1 * c.n2)

    def leak_rate(leak):
        if leak == 0:
            return cap, True
        return -math.log2(float(leak * scale)), False

    k12, capped12 = leak_rate(c.n1_leak)
    k21, capped21 = leak_rate(c.n2_leak)
    kap = kappa(c)
    k, capped_k = average_rate(kap, cap)
    return RateSummary(
        kappa=kap, k=k, k12=k12, k21=k21,
        k_w=f1 * k21 + (1.0 - f1) * k12, k_max=cap, f1=f1,
        capped12=capped12, capped21=capped21, cappedK=capped_k,
    )


def kappa_from_rates(f1, k12, k21):
    """Kappa from the class-1 fraction and the two leakage rates (bits)."""
    if not 0.0 <= f1 <= 1.0:
        raise ValueError(f"f1 must lie in [0, 1], got {f1}")
    f2 = 1.0 - f1
    a, b = 2.0 ** -k12, 2.0 ** -k21
    z = a - b
    return 2.0 * (1.0 - f1 * b - f2 * a) / (2.0 + z * (f1 - f2))


def kappa_from_class_sizes(n1, n2, k12, k21):
    """The same quantity written with the class sizes instead of fractions."""
    a, b = 2.0 ** -k12, 2.0 ** -k21
    num = 2.0 * n1 * (1.0 - b) + 2.0 * n2 * (1.0 - a)
    den = n1 * (2.0 + a - b) + n2 * (2.0 + b - a)
    return num / den


def check_rate_relation(summary):
    """|K - K_W| in bits; small when the two leakage rates are within ~0.6 bits."""
    return abs(summary.k - summary.k_w)
