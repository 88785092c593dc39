"""Hyperparameter sweep of the SSIMuse-B structure term across replication levels."""
import logging
from dataclasses import dataclass, replace
from typing import NamedTuple

from django.conf import settings
from django.db import models

from Metrics.ssimuse_b import BParams

from .battery import Mode, component_values, run_battery
from .stats import describe
from .synthesis import build_pools, level_pairs

logger = logging.getLogger('ssimuse')


class SweepParameter(models.TextChoices):
    WINDOW_STEPS = 'window_steps', 'Window size (steps)'
    HOP_STEPS = 'hop_steps', 'Hop size (steps)'
    WEIGHT_EXPONENT = 'weight_exponent', 'Weight exponent'


@dataclass(frozen=True)
class SweepConfig:
    parameter: str
    values: tuple
    base: object

    def __post_init__(self):
        SweepParameter(self.parameter)
        if not self.values:
            raise ValueError("a sweep needs at least one value")

    @classmethod
    def default_values(cls, parameter):
        return tuple(settings.SSIMUSE_SWEEP_VALUES[SweepParameter(parameter).value])


class SweepRow(NamedTuple):
    parameter: str
    value: float
    level: str
    mean_s: float
    std_s: float
    n: int


def run_sweep(sweep, corpus, b_params=None, workers=1):
    """Mean and std of s per (parameter value, level), other parameters held fixed.

    Pools and target pairs are drawn once so every value scores the same pairs.
    """
    base_params = b_params or BParams.from_settings()
    pools = build_pools(corpus, sweep.base)
    groups = level_pairs(pools, sweep.base)
    flat = [(pair.target, pair.reference) for pairs in groups.values() for pair in pairs]

    rows = []
    for value in sweep.values:
        params = replace(base_params, **{sweep.parameter: value})
        logger.info(f"Sweep {sweep.parameter}={value}: {len(flat)} pairs")
        reports = run_battery(flat, Mode.BINARY, params, workers=workers)
        offset = 0
        for level, pairs in groups.items():
            d = describe(component_values(reports[offset:offset + len(pairs)], 'ssimuse_b', 's'))
            rows.append(SweepRow(sweep.parameter, value, str(level), d.mean, d.std, d.n))
            offset += len(pairs)
    return rows
