"""Kruskal-Wallis H test and the chi-square tail it needs.

The upper regularized incomplete gamma uses the series expansion below
a + 1 and Lentz's continued fraction above it.
"""
import logging
import math
import sys
from typing import NamedTuple

import numpy as np

from SSIMuse.exceptions import SSIMuseError

logger = logging.getLogger('ssimuse')

ACCURACY = 1e-15
MAX_ITERATIONS = 1000


class InsufficientGroups(SSIMuseError):
    pass


class KruskalResult(NamedTuple):
    h: float
    df: int
    p: float
    degenerate: bool = False


class Description(NamedTuple):
    mean: float
    std: float
    n: int


def _gamma_series(a, x):
    term = total = 1.0 / a
    ap = a
    for _ in range(MAX_ITERATIONS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * ACCURACY:
            break
    else:
        logger.warning(f"Incomplete gamma series did not converge for a={a}, x={x}")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_continued_fraction(a, x):
    tiny = sys.float_info.min / sys.float_info.epsilon
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITERATIONS + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < ACCURACY:
            break
    else:
        logger.warning(f"Incomplete gamma continued fraction did not converge for a={a}, x={x}")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammaincc(a, x):
    """Upper regularized incomplete gamma Q(a, x) for a > 0, x >= 0."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return _gamma_continued_fraction(a, x)


def chi2_sf(x, df):
    """P(X > x) for a chi-square variable with df degrees of freedom."""
    if x <= 0:
        return 1.0
    return gammaincc(df / 2.0, x / 2.0)


def midranks(values):
    """1-based ranks with ties sharing the average of their positions."""
    values = np.asarray(values, dtype=float)
    unique, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    starts = np.cumsum(counts) - counts
    return (starts + (counts + 1) / 2.0)[inverse], counts


def kruskal_wallis(groups):
    groups = [np.asarray(g, dtype=float).ravel() for g in groups]
    if len(groups) < 2:
        raise InsufficientGroups("Kruskal-Wallis needs at least two groups")
    if any(g.size == 0 for g in groups):
        raise InsufficientGroups("every group needs at least one observation")
    total = sum(g.size for g in groups)
    if total < 3:
        raise InsufficientGroups("Kruskal-Wallis needs at least three observations")

    df = len(groups) - 1
    ranks, ties = midranks(np.concatenate(groups))
    correction = 1.0 - float((ties ** 3 - ties).sum()) / (total ** 3 - total)
    if correction <= 0:
        logger.warning("Kruskal-Wallis on identical observations: H = 0, p = 1")
        return KruskalResult(0.0, df, 1.0, degenerate=True)

    rank_term = 0.0
    offset = 0
    for g in groups:
        rank_term += ranks[offset:offset + g.size].sum() ** 2 / g.size
        offset += g.size
    h = (12.0 / (total * (total + 1)) * rank_term - 3.0 * (total + 1)) / correction
    h = max(h, 0.0)
    return KruskalResult(float(h), df, float(chi2_sf(h, df)))


def describe(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return Description(float('nan'), float('nan'), 0)
    std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return Description(float(values.mean()), std, int(values.size))
