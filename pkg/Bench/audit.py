"""Whole-piece comparison and corpus audit built on the pair battery."""
import logging
from typing import NamedTuple, Optional

from Metrics.ssimuse_b import BParams, classic_mssim
from SSIMuse.exceptions import SSIMuseError

from .battery import Mode, run_battery

logger = logging.getLogger('ssimuse')


class EmptyCorpus(SSIMuseError):
    pass


def ranking_score(report, mode):
    """SSIMuse-B for binary, SSIMuse-V for velocity, the mean of both otherwise.

    A pair skipped for SSIMuse-V ranks on whatever metric did score it;
    None when nothing did.
    """
    scores = []
    if report.b is not None and Mode(mode) != Mode.VELOCITY:
        scores.append(report.b.ssimuse_b)
    if report.v is not None and Mode(mode) != Mode.BINARY:
        scores.append(report.v.ssimuse_v)
    if not scores:
        return None
    return sum(scores) / len(scores)


def silence_mismatch(pair):
    return pair[0].is_empty != pair[1].is_empty


class PieceComparison(NamedTuple):
    reports: list
    mssim: list
    best_clip: Optional[int]
    best_score: Optional[float]
    clips_a: int
    clips_b: int


def compare_pieces(a, b, mode=Mode.BOTH, b_params=None, v_params=None, workers=1):
    """Clip-by-clip comparison at matching indices, truncated to the shorter piece."""
    b_params = b_params or BParams.from_settings()
    count = min(len(a.clips), len(b.clips))
    if count < max(len(a.clips), len(b.clips)):
        logger.info(f"Comparing the first {count} clips of {a.name} ({len(a.clips)}) and {b.name} ({len(b.clips)})")
    pairs = [(a.clips[i], b.clips[i]) for i in range(count)]
    reports = run_battery(pairs, mode, b_params, v_params, workers=workers)

    mssim = [classic_mssim(x, y, b_params.window_steps, b_params.hop_steps) for x, y in pairs]

    best_clip = best_score = None
    for index, report in enumerate(reports):
        if silence_mismatch(pairs[index]):
            logger.info(f"Clip {index}: one side is silent")
        score = ranking_score(report, mode)
        if score is not None and (best_score is None or score > best_score):
            best_clip, best_score = index, score
    return PieceComparison(reports, mssim, best_clip, best_score, len(a.clips), len(b.clips))


class AuditMatch(NamedTuple):
    score: float
    query_clip: int
    corpus_file: str
    corpus_clip: int
    report: object

    @property
    def sort_key(self):
        return (-self.score, self.corpus_file, self.corpus_clip, self.query_clip)

    def as_row(self):
        b = self.report.b.ssimuse_b if self.report.b is not None else ''
        v = self.report.v.ssimuse_v if self.report.v is not None else ''
        return [self.query_clip, self.corpus_file, self.corpus_clip, self.score, b, v]


def audit_corpus(query, corpus, mode=Mode.BOTH, top_k=10, b_params=None, v_params=None, workers=1):
    """Score every query clip against every corpus clip; best top_k clip pairs first.

    Ties are broken by corpus file name, then corpus clip index.
    """
    if top_k < 1:
        raise ValueError("top_k must be positive")
    keys = []
    pairs = []
    for piece in sorted(corpus.pieces, key=lambda p: p.name):
        for ci, clip in enumerate(piece.clips):
            for qi, qclip in enumerate(query.clips):
                keys.append((qi, piece.name, ci))
                pairs.append((qclip, clip))
    if not pairs:
        raise EmptyCorpus("no parseable clips to audit against")

    reports = run_battery(pairs, mode, b_params, v_params, workers=workers)
    matches = []
    for (qi, name, ci), report in zip(keys, reports):
        score = ranking_score(report, mode)
        if score is None:
            continue
        matches.append(AuditMatch(score, qi, name, ci, report))
    matches.sort(key=lambda m: m.sort_key)
    logger.info(f"Audit of {query.name}: {len(matches)} scored clip pairs")
    return matches[:top_k]
