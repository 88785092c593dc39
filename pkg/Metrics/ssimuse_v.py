"""SSIMuse-V: performance-dynamics similarity of velocity piano rolls.

l and c compare the mean and spread of onset velocities (silence ignored);
s correlates the per-step peak-velocity curves after DTW alignment.
score = l * c * s, reported unclamped (s may be negative).
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from django.conf import settings

from Rolls.exceptions import WrongFlavor
from Rolls.pianoroll import Flavor
from SSIMuse.exceptions import SSIMuseError

from .reports import ReportMixin
from .ssimuse_b import luminance

logger = logging.getLogger('ssimuse')


class EmptyClip(SSIMuseError):
    """A clip without onsets cannot be scored for dynamics."""


class EmptyCurve(SSIMuseError):
    pass


@dataclass(frozen=True)
class VParams:
    c1: float = 1e-4
    c2: float = 9e-4
    velocity_scale: float = 127.0

    def __post_init__(self):
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("c1 and c2 must be positive")
        if self.velocity_scale <= 0:
            raise ValueError("velocity_scale must be positive")

    @property
    def c3(self):
        return self.c2 / 2

    @classmethod
    def from_settings(cls, **overrides):
        values = dict(settings.SSIMUSE_V_PARAMS)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class VelocityCurve:
    values: tuple
    step_index: tuple

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class VReport(ReportMixin):
    l: float
    c: float
    s: float
    ssimuse_v: float
    dtw_path_len: int
    degenerate: bool = False


class Alignment(NamedTuple):
    a: list
    b: list
    cost: float
    path: list


def _velocity_grid(x):
    roll = getattr(x, 'roll', x)
    if roll.flavor != Flavor.VELOCITY:
        raise WrongFlavor("SSIMuse-V needs velocity piano rolls")
    return roll.grid


def _onsets(x, scale):
    grid = _velocity_grid(x)
    values = grid[grid > 0] / scale
    if values.size == 0:
        raise EmptyClip(f"clip {getattr(x, 'origin', '')} has no onsets")
    return values


def _is_constant(a):
    a = np.asarray(a, dtype=float)
    return a.size < 2 or bool(np.ptp(a) == 0)


def sample_cov(a, b):
    """Covariance with the n - 1 divisor.

    Exactly 0 when either sequence is constant or shorter than two points;
    summation noise on equal floats is not spread.
    """
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if _is_constant(a) or _is_constant(b):
        return 0.0
    return float(((a - a.mean()) * (b - b.mean())).sum() / (a.size - 1))


def onset_stats(x, p=None):
    """(mean, sample std) of normalized velocities at onset cells only."""
    p = p or VParams.from_settings()
    values = _onsets(x, p.velocity_scale)
    return float(values.mean()), float(np.sqrt(sample_cov(values, values)))


def dynamic_l(x, y, p=None):
    p = p or VParams.from_settings()
    mx, _ = onset_stats(x, p)
    my, _ = onset_stats(y, p)
    return float(luminance(mx, my, p.c1))


def contrast(sx, sy, c2):
    return (2 * sx * sy + c2) / (sx * sx + sy * sy + c2)


def dynamic_c(x, y, p=None):
    p = p or VParams.from_settings()
    _, sx = onset_stats(x, p)
    _, sy = onset_stats(y, p)
    return float(contrast(sx, sy, p.c2))


def extract_curve(x, p=None):
    """Peak normalized velocity of every sounding step, silent steps skipped."""
    p = p or VParams.from_settings()
    grid = _velocity_grid(x)
    peaks = grid.max(axis=1)
    steps = np.flatnonzero(peaks)
    if steps.size == 0:
        raise EmptyClip(f"clip {getattr(x, 'origin', '')} has no onsets")
    return VelocityCurve(tuple((peaks[steps] / p.velocity_scale).tolist()), tuple(steps.tolist()))


def dtw_align(a, b):
    """Classic DTW with |a_i - b_j| cost and steps (1,0), (0,1), (1,1).

    Both endpoints are matched. Backtracking prefers the diagonal, then
    (1,0), then (0,1) on ties. Returns both sequences expanded along the path.
    """
    a = list(getattr(a, 'values', a))
    b = list(getattr(b, 'values', b))
    if not a or not b:
        raise EmptyCurve("DTW needs two nonempty curves")
    n, m = len(a), len(b)
    inf = float('inf')
    acc = [[inf] * (m + 1) for _ in range(n + 1)]
    acc[0][0] = 0.0
    for i in range(1, n + 1):
        ai = a[i - 1]
        prev, row = acc[i - 1], acc[i]
        for j in range(1, m + 1):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if row[j - 1] < best:
                best = row[j - 1]
            row[j] = abs(ai - b[j - 1]) + best

    i, j = n, m
    path = [(i - 1, j - 1)]
    while (i, j) != (1, 1):
        diag, up, left = acc[i - 1][j - 1], acc[i - 1][j], acc[i][j - 1]
        if diag <= up and diag <= left:
            i, j = i - 1, j - 1
        elif up <= left:
            i -= 1
        else:
            j -= 1
        path.append((i - 1, j - 1))
    path.reverse()
    return Alignment([a[p] for p, _ in path], [b[q] for _, q in path], acc[n][m], path)


def structure(a, b, c3):
    """(cov(a, b) + C3) / (std(a) std(b) + C3) on equal-length sequences."""
    spread = np.sqrt(sample_cov(a, a) * sample_cov(b, b))
    return float((sample_cov(a, b) + c3) / (spread + c3))


def _aligned_structure(x, y, p):
    a, b = extract_curve(x, p), extract_curve(y, p)
    # a fixed argument order keeps DTW tie-breaking independent of (x, y) order
    if b.values < a.values:
        a, b = b, a
    alignment = dtw_align(a, b)
    degenerate = _is_constant(alignment.a) or _is_constant(alignment.b)
    s = 1.0 if degenerate else structure(alignment.a, alignment.b, p.c3)
    return s, len(alignment.path), degenerate


def velocity_s(x, y, p=None):
    p = p or VParams.from_settings()
    return _aligned_structure(x, y, p)[0]


def ssimuse_v(x, y, p=None):
    p = p or VParams.from_settings()
    l = dynamic_l(x, y, p)
    c = dynamic_c(x, y, p)
    s, path_len, degenerate = _aligned_structure(x, y, p)
    if degenerate:
        logger.debug("SSIMuse-V structure fell back to the constant-curve rule")
    return VReport(l=l, c=c, s=s, ssimuse_v=l * c * s, dtw_path_len=path_len, degenerate=degenerate)
