"""SSIMuse-B: composition similarity of binary piano rolls.

score = l * s where l compares note density over the whole clip and s is
the best penalized, weighted window Jaccard over pitch-class folded rolls
under every cyclic (time, pitch-class) shift.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from Rolls.pianoroll import PITCH_CLASSES, FoldedRoll, fold_pitch_classes, to_binary
from SSIMuse.exceptions import SSIMuseError

from .reports import ReportMixin

logger = logging.getLogger('ssimuse')


class LengthMismatch(SSIMuseError):
    pass


class ShapeMismatch(SSIMuseError):
    pass


@dataclass(frozen=True)
class BParams:
    window_steps: int = 16
    hop_steps: int = 16
    weight_exponent: float = 1.0
    lam: float = 0.5
    c1: float = 1e-4

    def __post_init__(self):
        if self.window_steps < 1 or self.hop_steps < 1:
            raise ValueError("window_steps and hop_steps must be positive")
        if self.weight_exponent < 0:
            raise ValueError("weight_exponent must be nonnegative")
        if not 0 <= self.lam <= 1:
            raise ValueError("lam must be in [0, 1]")
        if self.c1 <= 0:
            raise ValueError("c1 must be positive")

    @classmethod
    def from_settings(cls, **overrides):
        values = dict(settings.SSIMUSE_B_PARAMS)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class BReport(ReportMixin):
    l: float
    s: float
    ssimuse_b: float
    best_shift: tuple = (0, 0)
    per_window_s: tuple = field(default=())

    csv_fields = ('l', 's', 'ssimuse_b', 'best_shift', 'per_window_s')


def _binary_grid(clip):
    return to_binary(getattr(clip, 'roll', clip)).grid


def _folded(roll_or_clip):
    if isinstance(roll_or_clip, FoldedRoll):
        return roll_or_clip.grid
    return fold_pitch_classes(to_binary(getattr(roll_or_clip, 'roll', roll_or_clip))).grid


def luminance(mx, my, c):
    return (2 * mx * my + c) / (mx * mx + my * my + c)


def density_l(x, y, c1=1e-4):
    """Note-density consistency over the full T x 128 binary grids."""
    gx, gy = _binary_grid(x), _binary_grid(y)
    if gx.shape != gy.shape:
        raise LengthMismatch(f"clip lengths differ: {gx.shape[0]} vs {gy.shape[0]}")
    return float(luminance(gx.mean(), gy.mean(), c1))


def window_jaccard(xw, yw):
    """|x & y| / |x | y| over active (count > 0) cells; 1.0 when both are silent."""
    xw, yw = np.asarray(getattr(xw, 'grid', xw)), np.asarray(getattr(yw, 'grid', yw))
    if xw.shape != yw.shape:
        raise ShapeMismatch(f"window shapes differ: {xw.shape} vs {yw.shape}")
    xa, ya = xw > 0, yw > 0
    union = np.count_nonzero(xa | ya)
    if union == 0:
        return 1.0
    return np.count_nonzero(xa & ya) / union


def window_starts(steps, p):
    if p.window_steps > steps:
        raise LengthMismatch(f"window of {p.window_steps} steps exceeds clip of {steps} steps")
    return np.arange(0, steps - p.window_steps + 1, p.hop_steps)


def weighted_mean(window_s, exponent):
    """sum(w * s) / sum(w) with w = s ** exponent along the last axis; 0 when sum(w) == 0."""
    window_s = np.asarray(window_s, dtype=float)
    weights = window_s ** exponent
    total = weights.sum(axis=-1)
    num = (weights * window_s).sum(axis=-1)
    return np.where(total > 0, num / np.where(total > 0, total, 1.0), 0.0)


def _per_window(xa, ya, p):
    starts = window_starts(xa.shape[0], p)
    return np.array([window_jaccard(xa[t:t + p.window_steps], ya[t:t + p.window_steps]) for t in starts])


def weighted_window_s(xf, yf, p=None):
    p = p or BParams.from_settings()
    xa, ya = _folded(xf), _folded(yf)
    if xa.shape != ya.shape:
        raise LengthMismatch(f"clip lengths differ: {xa.shape[0]} vs {ya.shape[0]}")
    return float(weighted_mean(_per_window(xa, ya, p), p.weight_exponent))


def _window_sums(rows, starts, window):
    zero = np.zeros(rows.shape[:-1] + (1,), dtype=rows.dtype)
    csum = np.concatenate([zero, np.cumsum(rows, axis=-1)], axis=-1)
    return csum[..., starts + window] - csum[..., starts]


def _shift_table(xa, ya, p):
    """Weighted window similarity for every cyclic shift of ya.

    Entry [dp, r] scores x against ya rolled by r steps and dp pitch classes,
    so that shifted row i is ya[(i - r) mod T] shifted up dp classes.
    """
    steps = xa.shape[0]
    starts = window_starts(steps, p)
    a = xa.astype(float)
    b = ya.astype(float)
    rows = np.arange(steps)
    src = (rows[None, :] - rows[:, None]) % steps

    rolled = np.stack([np.roll(b, dp, axis=1) for dp in range(PITCH_CLASSES)])
    products = a[None] @ rolled.transpose(0, 2, 1)
    inter = products[:, rows[None, :], src]
    union = a.sum(axis=1)[None, None, :] + b.sum(axis=1)[src][None] - inter

    inter_w = _window_sums(inter, starts, p.window_steps)
    union_w = _window_sums(union, starts, p.window_steps)
    jaccard = np.where(union_w == 0, 1.0, inter_w / np.maximum(union_w, 1))
    return weighted_mean(jaccard, p.weight_exponent)


def _best_shift(table, lam):
    steps = table.shape[1]
    offsets = np.arange(steps)
    magnitude = np.minimum(offsets, steps - offsets)
    scores = table * (1.0 - lam * magnitude / steps)[None, :]
    dp_keys = np.repeat(np.arange(PITCH_CLASSES), steps)
    mag_keys = np.tile(magnitude, PITCH_CLASSES)
    order = np.lexsort((dp_keys, mag_keys, -scores.ravel()))
    dp, r = divmod(int(order[0]), steps)
    dt = r if r <= steps // 2 else r - steps
    return float(scores[dp, r]), (dt, dp)


def _search(xa, ya, p):
    """(s, shift applied to y, winning orientation swapped?, raw shift of that orientation)."""
    if xa.shape != ya.shape:
        raise LengthMismatch(f"clip lengths differ: {xa.shape[0]} vs {ya.shape[0]}")
    window_starts(xa.shape[0], p)

    x_silent, y_silent = not xa.any(), not ya.any()
    if x_silent and y_silent:
        return 1.0, (0, 0), False, (0, 0)
    if x_silent or y_silent:
        return 0.0, (0, 0), False, (0, 0)

    forward, shift = _best_shift(_shift_table(xa, ya, p), p.lam)
    backward, back_shift = _best_shift(_shift_table(ya, xa, p), p.lam)
    if backward > forward:
        dt, dp = back_shift
        return backward, (-dt, (-dp) % PITCH_CLASSES), True, back_shift
    return forward, shift, False, shift


def shift_search_s(xf, yf, p=None):
    """Max over cyclic (dt, dp) shifts of weighted window s times (1 - lam |dt| / T).

    Both orientations are searched so the result is symmetric in (x, y);
    the returned shift is always the one applied to y. Ties prefer the
    smallest |dt|, then the smallest dp.
    """
    p = p or BParams.from_settings()
    s, shift, _, _ = _search(_folded(xf) > 0, _folded(yf) > 0, p)
    return s, shift


def shift_folded(grid, dt, dp):
    return np.roll(np.roll(grid, dt, axis=0), dp, axis=1)


def ssimuse_b(x, y, p=None):
    p = p or BParams.from_settings()
    l = density_l(x, y, p.c1)
    xa, ya = _folded(x) > 0, _folded(y) > 0
    s, (dt, dp), swapped, (raw_dt, raw_dp) = _search(xa, ya, p)
    if swapped:
        per_window = _per_window(ya, shift_folded(xa, raw_dt, raw_dp), p)
    else:
        per_window = _per_window(xa, shift_folded(ya, dt, dp), p)
    return BReport(
        l=l,
        s=s,
        ssimuse_b=l * s,
        best_shift=(int(dt), int(dp)),
        per_window_s=tuple(float(v) for v in per_window),
    )


def classic_mssim(x, y, window_steps=16, hop_steps=16, c1=1e-4, c2=9e-4):
    """Plain SSIM (l * c * s with mean subtraction, C3 = C2 / 2) averaged
    over temporal windows of the unfolded binary grids.

    Reported next to SSIMuse-B for reference; it has neither octave folding
    nor shift search.
    """
    gx, gy = _binary_grid(x).astype(float), _binary_grid(y).astype(float)
    if gx.shape != gy.shape:
        raise LengthMismatch(f"clip lengths differ: {gx.shape[0]} vs {gy.shape[0]}")
    c3 = c2 / 2
    scores = []
    for start in window_starts(gx.shape[0], BParams(window_steps=window_steps, hop_steps=hop_steps)):
        wx = gx[start:start + window_steps].ravel()
        wy = gy[start:start + window_steps].ravel()
        mx, my = wx.mean(), wy.mean()
        vx, vy = wx.var(ddof=1), wy.var(ddof=1)
        cov = ((wx - mx) * (wy - my)).sum() / (wx.size - 1)
        sx_sy = np.sqrt(vx * vy)
        contrast = (2 * sx_sy + c2) / (vx + vy + c2)
        structure = (cov + c3) / (sx_sy + c3)
        scores.append(luminance(mx, my, c1) * contrast * structure)
    return float(np.mean(scores))
