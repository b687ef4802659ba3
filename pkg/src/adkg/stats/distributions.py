"""Tail probabilities for the t, F and studentized-range distributions.

t and F tails go through the regularized incomplete beta function.
"""

from __future__ import annotations

import math

from scipy import special, stats


def t_two_sided_p(t: float, df: float) -> float:
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    return float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))


def f_upper_p(f: float, df1: float, df2: float) -> float:
    if f <= 0.0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return float(special.betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f)))


def studentized_range_critical(alpha: float, k: int, df: float) -> float:
    return float(stats.studentized_range.ppf(1.0 - alpha, k, df))


def studentized_range_upper_p(q: float, k: int, df: float) -> float:
    if q <= 0.0:
        return 1.0
    return float(stats.studentized_range.sf(q, k, df))
