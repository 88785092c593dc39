"""Binary and velocity piano rolls: construction, folding, clipping, pasting."""
import csv
import logging
from dataclasses import dataclass, replace

import numpy as np
from django.db import models
from PIL import Image

from .exceptions import BadClipLength, EmptyInput, OutOfRange, WrongFlavor

logger = logging.getLogger('ssimuse')

PITCHES = 128
PITCH_CLASSES = 12


class Flavor(models.TextChoices):
    BINARY = 'binary', 'Binary'
    VELOCITY = 'velocity', 'Velocity'


def _frozen(grid):
    grid = np.ascontiguousarray(grid)
    grid.flags.writeable = False
    return grid


@dataclass(frozen=True, eq=False)
class PianoRoll:
    grid: np.ndarray
    flavor: str = Flavor.BINARY
    steps_per_bar: int = 16

    def __post_init__(self):
        grid = np.asarray(self.grid)
        if grid.ndim != 2 or grid.shape[1] != PITCHES:
            raise ValueError(f"piano roll grid must be T x {PITCHES}, got {grid.shape}")
        if grid.min(initial=0) < 0:
            raise ValueError("piano roll cells must be nonnegative")
        if self.flavor == Flavor.BINARY and grid.max(initial=0) > 1:
            raise ValueError("binary roll cells must be 0 or 1")
        if self.flavor == Flavor.VELOCITY and grid.max(initial=0) > 127:
            raise ValueError("velocity roll cells must be in [0, 127]")
        object.__setattr__(self, 'grid', _frozen(grid.astype(np.int16, copy=False)))

    @property
    def steps(self):
        return self.grid.shape[0]

    @property
    def is_empty(self):
        return not self.grid.any()

    def __eq__(self, other):
        if not isinstance(other, PianoRoll):
            return NotImplemented
        return (self.flavor == other.flavor and self.steps_per_bar == other.steps_per_bar
                and np.array_equal(self.grid, other.grid))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class FoldedRoll:
    grid: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid)
        if grid.ndim != 2 or grid.shape[1] != PITCH_CLASSES:
            raise ValueError(f"folded roll grid must be T x {PITCH_CLASSES}, got {grid.shape}")
        object.__setattr__(self, 'grid', _frozen(grid.astype(np.int32, copy=False)))

    @property
    def steps(self):
        return self.grid.shape[0]

    @property
    def active(self):
        return self.grid > 0


@dataclass(frozen=True)
class Clip:
    roll: PianoRoll
    source_id: str = ''
    start_step: int = 0

    @property
    def origin(self):
        return (self.source_id, self.start_step)

    @property
    def steps(self):
        return self.roll.steps

    @property
    def n_bars(self):
        return self.roll.steps // self.roll.steps_per_bar

    @property
    def is_empty(self):
        return self.roll.is_empty

    def as_binary(self):
        return replace(self, roll=to_binary(self.roll))


def build_roll(ts, flavor=Flavor.BINARY):
    """Place each onset of a QuantizedTrackSet on a bar-padded T x 128 grid."""
    if not ts.events:
        raise EmptyInput(f"{ts.source_id or 'input'} has no note onsets")
    steps_per_bar = ts.steps_per_bar
    steps = -(-ts.total_steps // steps_per_bar) * steps_per_bar
    grid = np.zeros((steps, PITCHES), dtype=np.int16)
    for event in ts.events:
        value = 1 if flavor == Flavor.BINARY else event.velocity
        grid[event.step, event.pitch] = max(grid[event.step, event.pitch], value)
    return PianoRoll(grid, flavor=Flavor(flavor), steps_per_bar=steps_per_bar)


def to_binary(pr):
    if pr.flavor == Flavor.BINARY:
        return pr
    return PianoRoll((pr.grid > 0).astype(np.int16), flavor=Flavor.BINARY, steps_per_bar=pr.steps_per_bar)


def fold_pitch_classes(pr):
    """Sum the 128 pitch rows into 12 pitch classes (pitch mod 12)."""
    if pr.flavor != Flavor.BINARY:
        raise WrongFlavor("pitch-class folding is defined for binary rolls only")
    padded = np.zeros((pr.steps, 11 * PITCH_CLASSES), dtype=np.int32)
    padded[:, :PITCHES] = pr.grid
    return FoldedRoll(padded.reshape(pr.steps, 11, PITCH_CLASSES).sum(axis=1))


def segment_clips(pr, clip_steps=256, source_id=''):
    """Consecutive non-overlapping clips; a trailing partial clip is dropped."""
    if clip_steps <= 0 or clip_steps % pr.steps_per_bar:
        raise BadClipLength(f"clip length {clip_steps} is not a multiple of {pr.steps_per_bar} steps")
    clips = []
    for start in range(0, pr.steps - clip_steps + 1, clip_steps):
        roll = PianoRoll(pr.grid[start:start + clip_steps], flavor=pr.flavor, steps_per_bar=pr.steps_per_bar)
        clips.append(Clip(roll, source_id=source_id, start_step=start))
    return clips


def pad_to_clip(pr, clip_steps=256, source_id=''):
    """Zero-pad (or cut) a roll to exactly one clip."""
    if clip_steps <= 0 or clip_steps % pr.steps_per_bar:
        raise BadClipLength(f"clip length {clip_steps} is not a multiple of {pr.steps_per_bar} steps")
    grid = np.zeros((clip_steps, PITCHES), dtype=np.int16)
    kept = min(clip_steps, pr.steps)
    grid[:kept] = pr.grid[:kept]
    return Clip(PianoRoll(grid, flavor=pr.flavor, steps_per_bar=pr.steps_per_bar), source_id=source_id)


def paste_segment(dst, src, src_bar, dst_bar, n_bars):
    """Copy n_bars whole bars (all 128 pitch rows) from src over dst.

    Returns a new Clip; dst keeps its origin and is left untouched.
    """
    if src.roll.flavor != dst.roll.flavor:
        raise WrongFlavor("source and destination clips must share a flavor")
    bars = dst.n_bars
    if src.steps != dst.steps or src.roll.steps_per_bar != dst.roll.steps_per_bar:
        raise OutOfRange("source and destination clips must share length and bar size")
    if n_bars <= 0 or min(src_bar, dst_bar) < 0 or src_bar + n_bars > bars or dst_bar + n_bars > bars:
        raise OutOfRange(
            f"cannot paste {n_bars} bars from bar {src_bar} to bar {dst_bar} in a {bars}-bar clip"
        )
    spb = dst.roll.steps_per_bar
    grid = dst.roll.grid.copy()
    grid[dst_bar * spb:(dst_bar + n_bars) * spb] = src.roll.grid[src_bar * spb:(src_bar + n_bars) * spb]
    roll = PianoRoll(grid, flavor=dst.roll.flavor, steps_per_bar=spb)
    return replace(dst, roll=roll)


def dump_image(pr, path):
    """Greyscale image, one pixel per cell, pitch 127 on the top row.

    Velocity maps linearly to intensity (127 -> white); binary onsets are white.
    The format follows the file suffix (.pgm, .png, ...).
    """
    scale = 255 if pr.flavor == Flavor.BINARY else 255 / 127
    pixels = np.ascontiguousarray(np.rint(pr.grid.T[::-1] * scale).astype(np.uint8))
    Image.fromarray(pixels).save(path)
    logger.debug(f"Wrote roll image {path}")


def dump_csv(pr, path):
    steps, pitches = np.nonzero(pr.grid)
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(['step', 'pitch', 'value'])
        for step, pitch in zip(steps.tolist(), pitches.tolist()):
            writer.writerow([step, pitch, int(pr.grid[step, pitch])])
