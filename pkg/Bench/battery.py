"""Score clip pairs with SSIMuse-B and/or SSIMuse-V, optionally across processes."""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

from django.db import models

from Metrics.reports import SimilarityReport
from Metrics.ssimuse_b import BParams, ssimuse_b
from Metrics.ssimuse_v import EmptyClip, VParams, ssimuse_v

from .stats import InsufficientGroups, describe, kruskal_wallis
from .synthesis import build_pools, level_pairs

logger = logging.getLogger('ssimuse')


class Mode(models.TextChoices):
    BINARY = 'binary', 'Binary'
    VELOCITY = 'velocity', 'Velocity'
    BOTH = 'both', 'Both'


def score_pair(pair_id, x, y, mode, b_params, v_params):
    b = v = None
    skipped = ''
    if mode in (Mode.BINARY, Mode.BOTH):
        b = ssimuse_b(x.as_binary(), y.as_binary(), b_params)
    if mode in (Mode.VELOCITY, Mode.BOTH):
        try:
            v = ssimuse_v(x, y, v_params)
        except EmptyClip as e:
            skipped = str(e)
    return SimilarityReport(pair_id=pair_id, b=b, v=v, skipped=skipped)


def _score_job(job):
    return score_pair(*job)


def run_battery(pairs, mode=Mode.BOTH, b_params=None, v_params=None, workers=1, first_id=0):
    """One SimilarityReport per (target, reference) pair, in input order.

    Pairs whose velocity side is silent keep their binary scores and are
    marked skipped for SSIMuse-V instead of aborting the run.
    """
    if not pairs:
        raise ValueError("run_battery needs at least one pair")
    mode = Mode(mode)
    b_params = b_params or BParams.from_settings()
    v_params = v_params or VParams.from_settings()
    jobs = [(first_id + i, pair[0], pair[1], mode, b_params, v_params) for i, pair in enumerate(pairs)]

    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_score_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        reports = [_score_job(job) for job in jobs]

    skipped = sum(1 for r in reports if r.skipped)
    if skipped:
        logger.info(f"{skipped} of {len(reports)} pairs skipped for SSIMuse-V (silent clip)")
    return reports


COMPONENTS = {
    'ssimuse_b': ('l', 's', 'ssimuse_b'),
    'ssimuse_v': ('l', 'c', 's', 'ssimuse_v'),
}


class SummaryRow(NamedTuple):
    level: str
    component: str
    mean: float
    std: float
    n: int


@dataclass
class BenchResult:
    config: object
    groups: dict = field(default_factory=dict)
    summary: list = field(default_factory=list)
    kw: dict = field(default_factory=dict)
    skipped: int = 0

    @property
    def metrics(self):
        mode = Mode(self.config.mode)
        return [m for m, wanted in (('ssimuse_b', mode != Mode.VELOCITY), ('ssimuse_v', mode != Mode.BINARY))
                if wanted]

    def mean(self, level, component):
        for row in self.summary:
            if row.level == str(level) and row.component == component:
                return row.mean
        raise KeyError((level, component))


def component_values(reports, metric, name):
    """Values of one component over the reports that were scored by metric."""
    values = []
    for report in reports:
        part = report.b if metric == 'ssimuse_b' else report.v
        if part is not None:
            values.append(getattr(part, name))
    return values


def summarize(groups, metrics):
    rows = []
    for level, reports in groups.items():
        for metric in metrics:
            for name in COMPONENTS[metric]:
                component = metric if name == metric else f'{metric}.{name}'
                d = describe(component_values(reports, metric, name))
                rows.append(SummaryRow(str(level), component, d.mean, d.std, d.n))
    return rows


def run_bench(corpus, cfg, b_params=None, v_params=None, workers=1):
    """Forced-replication bench: pools, baseline and level pairs, battery, Kruskal-Wallis."""
    pools = build_pools(corpus, cfg)
    # every random draw is made here, before any pair is scored
    pair_groups = level_pairs(pools, cfg)

    flat = [(pair.target, pair.reference) for pairs in pair_groups.values() for pair in pairs]
    logger.info(f"Bench seed {cfg.seed}: scoring {len(flat)} pairs over {len(pair_groups)} groups")
    reports = run_battery(flat, cfg.mode, b_params, v_params, workers=workers)

    result = BenchResult(config=cfg)
    offset = 0
    for level, pairs in pair_groups.items():
        result.groups[level] = reports[offset:offset + len(pairs)]
        offset += len(pairs)
    result.skipped = sum(1 for r in reports if r.skipped)
    result.summary = summarize(result.groups, result.metrics)

    for metric in result.metrics:
        samples = [component_values(group, metric, metric) for group in result.groups.values()]
        try:
            result.kw[metric] = kruskal_wallis(samples)
        except InsufficientGroups as e:
            logger.warning(f"No Kruskal-Wallis test for {metric}: {e}")
    return result
