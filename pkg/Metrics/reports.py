"""Serialization shared by BReport, VReport and SimilarityReport."""
import json
from dataclasses import asdict, dataclass, fields
from typing import Optional


class ReportMixin:
    csv_fields = ()

    def as_dict(self):
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = list(value)
        return data

    def to_json(self, **kwargs):
        return json.dumps(self.as_dict(), **kwargs)

    @classmethod
    def csv_header(cls):
        return list(cls.csv_fields or (f.name for f in fields(cls)))

    def csv_row(self):
        data = self.as_dict()
        return [json.dumps(data[name]) if isinstance(data[name], list) else data[name]
                for name in self.csv_header()]


@dataclass(frozen=True)
class SimilarityReport(ReportMixin):
    """Scores of one clip pair under one or both metrics.

    skipped carries the reason when a metric could not score the pair
    (silent clip on the velocity side); the binary report is still kept.
    """
    pair_id: int
    b: Optional[object] = None
    v: Optional[object] = None
    skipped: str = ''

    def as_dict(self):
        return {
            'pair_id': self.pair_id,
            'ssimuse_b': self.b.as_dict() if self.b else None,
            'ssimuse_v': self.v.as_dict() if self.v else None,
            'skipped': self.skipped,
        }

    def rows(self):
        """(metric, l, c, s, score, skipped) tuples, one per requested metric."""
        out = []
        if self.b is not None:
            out.append(('ssimuse_b', self.b.l, '', self.b.s, self.b.ssimuse_b, False))
        if self.v is not None:
            out.append(('ssimuse_v', self.v.l, self.v.c, self.v.s, self.v.ssimuse_v, False))
        elif self.skipped:
            out.append(('ssimuse_v', '', '', '', '', True))
        return out
