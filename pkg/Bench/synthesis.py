"""Forced-replication data: disjoint pools, pasted targets, baseline pairs.

Every random draw comes from numpy.random.default_rng([seed, key]) so that
each stage is reproducible on its own and nothing depends on worker order.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from django.conf import settings

from Rolls.pianoroll import paste_segment
from SSIMuse.exceptions import SSIMuseError

logger = logging.getLogger('ssimuse')

POOL_STREAM = 0
BASELINE_STREAM = 1
LEVEL_STREAM = 100

BASELINE = 'baseline'


class InsufficientCorpus(SSIMuseError):
    pass


@dataclass(frozen=True)
class BenchConfig:
    seed: int
    clip_steps: int = 256
    set_size: int = 20
    synthetics_per_reference: int = 5
    levels: tuple = (1, 2, 4, 8)
    mode: str = 'both'
    steps_per_bar: int = 16

    def __post_init__(self):
        if self.set_size < 1 or self.synthetics_per_reference < 1:
            raise ValueError("set_size and synthetics_per_reference must be positive")
        if self.clip_steps % self.steps_per_bar:
            raise ValueError("clip_steps must be a whole number of bars")
        if not self.levels:
            raise ValueError("at least one replication level is required")
        if any(not 1 <= level <= self.bars for level in self.levels):
            raise ValueError(f"levels must lie in [1, {self.bars}]")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def bars(self):
        return self.clip_steps // self.steps_per_bar

    @property
    def pairs_per_level(self):
        return self.set_size * self.synthetics_per_reference

    @classmethod
    def from_settings(cls, seed, **overrides):
        values = dict(settings.SSIMUSE_BENCH)
        values.update({k: v for k, v in overrides.items() if v is not None})
        values['levels'] = tuple(values['levels'])
        return cls(seed=int(seed), **values)

    def rng(self, key):
        return np.random.default_rng([int(self.seed), key])


class TargetPair(NamedTuple):
    target: object
    reference: object
    mixture_index: int = -1
    src_bar: int = 0
    dst_bar: int = 0


@dataclass
class Pools:
    reference: list = field(default_factory=list)
    mixture: list = field(default_factory=list)


def build_pools(corpus, cfg):
    """One nonempty clip per source piece; reference and mixture never share a piece."""
    by_source = defaultdict(list)
    for clip in corpus:
        if clip.steps == cfg.clip_steps and not clip.is_empty:
            by_source[clip.source_id].append(clip)
    sources = sorted(by_source)
    needed = 2 * cfg.set_size
    if len(sources) < needed:
        raise InsufficientCorpus(
            f"need {needed} distinct pieces with nonempty {cfg.clip_steps}-step clips, found {len(sources)}"
        )
    rng = cfg.rng(POOL_STREAM)
    chosen = []
    for index in rng.permutation(len(sources))[:needed]:
        clips = by_source[sources[index]]
        chosen.append(clips[int(rng.integers(len(clips)))])
    logger.info(f"Pools built from {len(sources)} pieces: {cfg.set_size} reference / {cfg.set_size} mixture")
    return Pools(reference=chosen[:cfg.set_size], mixture=chosen[cfg.set_size:])


def synthesize_targets(reference, mixture, level_bars, cfg):
    """Paste level_bars bars of each reference into synthetics_per_reference mixture clips.

    Mixture clips are drawn without replacement within one reference when the
    pool is large enough; source and destination bars are uniform and bar aligned.
    """
    if not 1 <= level_bars <= cfg.bars:
        raise ValueError(f"replication level must lie in [1, {cfg.bars}] bars")
    rng = cfg.rng(LEVEL_STREAM + level_bars)
    k = cfg.synthetics_per_reference
    pairs = []
    for ref in reference:
        picks = rng.choice(len(mixture), size=k, replace=len(mixture) < k)
        for index in picks:
            src_bar = int(rng.integers(0, cfg.bars - level_bars + 1))
            dst_bar = int(rng.integers(0, cfg.bars - level_bars + 1))
            target = paste_segment(mixture[int(index)], ref, src_bar, dst_bar, level_bars)
            pairs.append(TargetPair(target, ref, int(index), src_bar, dst_bar))
    return pairs


def baseline_pairs(reference, mixture, cfg):
    """Random reference-mixture pairs, as many as one replication level has."""
    rng = cfg.rng(BASELINE_STREAM)
    pairs = []
    for _ in range(cfg.pairs_per_level):
        ref = reference[int(rng.integers(len(reference)))]
        index = int(rng.integers(len(mixture)))
        pairs.append(TargetPair(mixture[index], ref, index))
    return pairs


def level_pairs(pools, cfg):
    """{'baseline': [...], 1: [...], 2: [...], ...} in a fixed order."""
    groups = {BASELINE: baseline_pairs(pools.reference, pools.mixture, cfg)}
    for level in cfg.levels:
        groups[level] = synthesize_targets(pools.reference, pools.mixture, level, cfg)
    return groups
