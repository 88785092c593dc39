"""Write bench, sweep, compare and audit results as CSV, JSON, SVG and PDF.

Nothing written here carries a timestamp, so identical runs produce
identical files.
"""
import csv
import json
import logging
import os

from reportlab.graphics import renderSVG
from reportlab.graphics.charts.lineplots import LinePlot
from reportlab.graphics.shapes import Drawing, Line, String
from reportlab.graphics.widgets.markers import makeMarker
from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.lib.units import inch
from reportlab.pdfgen import canvas

from .synthesis import BASELINE

logger = logging.getLogger('ssimuse')

EMIT_CHOICES = ('csv', 'json', 'svg', 'pdf')

ROW_HEADER = ['corpus', 'mode', 'level', 'pair_id', 'l', 'c', 's', 'score', 'skipped']
SUMMARY_HEADER = ['level', 'component', 'mean', 'std', 'n']
STATS_HEADER = ['metric', 'H', 'df', 'p']
SWEEP_HEADER = ['parameter', 'value', 'level', 'mean_s', 'std_s', 'n']

METRIC_MODE = {'ssimuse_b': 'binary', 'ssimuse_v': 'velocity'}
LINE_COLORS = [colors.black, colors.blue, colors.red, colors.green, colors.orange, colors.purple]


def _write_csv(path, header, rows):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)
    logger.debug(f"Wrote {path}")
    return path


def _write_json(path, data):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write('\n')
    logger.debug(f"Wrote {path}")
    return path


def level_label(level):
    if str(level) == BASELINE:
        return 'Baseline'
    return f"{level} bar" if str(level) == '1' else f"{level} bars"


def bench_rows(result, corpus_name):
    for level, reports in result.groups.items():
        for report in reports:
            for metric, l, c, s, score, skipped in report.rows():
                yield [corpus_name, METRIC_MODE[metric], level, report.pair_id, l, c, s, score, int(skipped)]


def kw_rows(kw):
    return [[metric, res.h, res.df, res.p] for metric, res in kw.items()]


def kw_line(metric, res):
    line = f"Kruskal-Wallis {metric}: H={res.h:.4f} df={res.df} p={res.p:.4g}"
    return line + " (all scores identical)" if res.degenerate else line


def bench_document(result, corpus_name):
    cfg = result.config
    return {
        'corpus': corpus_name,
        'config': {
            'seed': str(cfg.seed),
            'clip_steps': cfg.clip_steps,
            'set_size': cfg.set_size,
            'synthetics_per_reference': cfg.synthetics_per_reference,
            'levels': list(cfg.levels),
            'mode': str(cfg.mode),
        },
        'summary': [row._asdict() for row in result.summary],
        'kruskal_wallis': {m: res._asdict() for m, res in result.kw.items()},
        'skipped': result.skipped,
    }


def _chart(title, labels, series, y_label):
    """Mean +/- std line chart; series is [(name, [(mean, std), ...]), ...] over labels."""
    drawing = Drawing(480, 300)
    plot = LinePlot()
    plot.x, plot.y, plot.width, plot.height = 60, 60, 300, 200

    lows = [m - s for _, points in series for m, s in points if m == m]
    highs = [m + s for _, points in series for m, s in points if m == m]
    y_min = min([0.0] + lows)
    y_max = max([1.0] + highs)

    plot.data = [[(i, m) for i, (m, _) in enumerate(points) if m == m] for _, points in series]
    plot.xValueAxis.valueMin = -0.5
    plot.xValueAxis.valueMax = len(labels) - 0.5
    plot.xValueAxis.valueSteps = list(range(len(labels)))
    plot.xValueAxis.labelTextFormat = lambda v: labels[int(round(v))] if 0 <= round(v) < len(labels) else ''
    plot.yValueAxis.valueMin = y_min
    plot.yValueAxis.valueMax = y_max
    for index in range(len(series)):
        plot.lines[index].strokeColor = LINE_COLORS[index % len(LINE_COLORS)]
        plot.lines[index].symbol = makeMarker('FilledCircle', size=4)
    drawing.add(plot)

    def to_x(v):
        return plot.x + (v + 0.5) / len(labels) * plot.width

    def to_y(v):
        return plot.y + (v - y_min) / (y_max - y_min) * plot.height

    for index, (name, points) in enumerate(series):
        color = LINE_COLORS[index % len(LINE_COLORS)]
        for i, (m, s) in enumerate(points):
            if m != m:
                continue
            drawing.add(Line(to_x(i), to_y(m - s), to_x(i), to_y(m + s), strokeColor=color))
        drawing.add(String(plot.x + plot.width + 10, plot.y + plot.height - 14 * index, name,
                           fontSize=9, fillColor=color))

    drawing.add(String(plot.x, plot.y + plot.height + 15, title, fontSize=11))
    drawing.add(String(10, plot.y + plot.height / 2, y_label, fontSize=9))
    return drawing


def _safe(name):
    return name.replace('.', '_')


def bench_charts(result, out_dir, prefix):
    labels = [level_label(level) for level in result.groups]
    by_component = {}
    for row in result.summary:
        by_component.setdefault(row.component, []).append((row.mean, row.std))
    paths = []
    for component, points in by_component.items():
        drawing = _chart(f"{component}: mean +/- std per replication level", labels, [(component, points)], 'score')
        path = os.path.join(out_dir, f"{prefix}_{_safe(component)}.svg")
        renderSVG.drawToFile(drawing, path)
        paths.append(path)
    return paths


def sweep_chart(rows, path):
    levels = list(dict.fromkeys(row.level for row in rows))
    series = {}
    for row in rows:
        series.setdefault(row.value, []).append((row.mean_s, row.std_s))
    parameter = rows[0].parameter if rows else ''
    drawing = _chart(f"s per replication level, {parameter} sweep", [level_label(l) for l in levels],
                     [(f"{parameter}={value}", points) for value, points in series.items()], 's')
    renderSVG.drawToFile(drawing, path)
    return path


def bench_pdf(result, corpus_name, path):
    p = canvas.Canvas(path, pagesize=A4, invariant=1)
    width, height = A4

    x_margin = 1 * inch
    y = height - 1 * inch
    line_height = 14

    def draw_line(text, font_size=11):
        nonlocal y
        if y <= 1 * inch:
            p.showPage()
            y = height - 1 * inch
        p.setFont("Helvetica", font_size)
        p.drawString(x_margin, y, text)
        y -= line_height

    cfg = result.config
    draw_line("SSIMuse forced-replication bench", 14)
    draw_line(f"Corpus: {corpus_name}")
    draw_line(f"Seed: {cfg.seed}   Mode: {cfg.mode}   Clip steps: {cfg.clip_steps}")
    draw_line(f"Set size: {cfg.set_size}   Synthetics per reference: {cfg.synthetics_per_reference}")
    draw_line(f"Levels: {', '.join(str(level) for level in cfg.levels)}   Skipped pairs: {result.skipped}")
    draw_line("")

    current = None
    for row in result.summary:
        if row.level != current:
            current = row.level
            draw_line(level_label(row.level), 12)
        draw_line(f"  {row.component}: {row.mean:.4f} +/- {row.std:.4f} (n={row.n})")
    draw_line("")
    for metric, res in result.kw.items():
        draw_line(kw_line(metric, res))

    p.save()
    return path


def write_bench(result, out_dir, corpus_name, emit=('csv',)):
    os.makedirs(out_dir, exist_ok=True)
    prefix = f"bench_{corpus_name}"
    paths = []
    if 'csv' in emit:
        paths.append(_write_csv(os.path.join(out_dir, f"{prefix}_rows.csv"), ROW_HEADER,
                                bench_rows(result, corpus_name)))
        paths.append(_write_csv(os.path.join(out_dir, f"{prefix}_summary.csv"), SUMMARY_HEADER,
                                ([r.level, r.component, r.mean, r.std, r.n] for r in result.summary)))
        paths.append(_write_csv(os.path.join(out_dir, f"{prefix}_stats.csv"), STATS_HEADER, kw_rows(result.kw)))
    if 'json' in emit:
        paths.append(_write_json(os.path.join(out_dir, f"{prefix}.json"), bench_document(result, corpus_name)))
    if 'svg' in emit:
        paths.extend(bench_charts(result, out_dir, prefix))
    if 'pdf' in emit:
        paths.append(bench_pdf(result, corpus_name, os.path.join(out_dir, f"{prefix}.pdf")))
    return paths


def write_sweep(rows, out_dir, corpus_name, emit=('csv',)):
    os.makedirs(out_dir, exist_ok=True)
    prefix = f"sweep_{corpus_name}_{rows[0].parameter}" if rows else f"sweep_{corpus_name}"
    paths = []
    if 'csv' in emit:
        paths.append(_write_csv(os.path.join(out_dir, f"{prefix}.csv"), SWEEP_HEADER, (list(r) for r in rows)))
    if 'json' in emit:
        paths.append(_write_json(os.path.join(out_dir, f"{prefix}.json"), [r._asdict() for r in rows]))
    if 'svg' in emit:
        paths.append(sweep_chart(rows, os.path.join(out_dir, f"{prefix}.svg")))
    return paths


COMPARE_HEADER = ['clip', 'metric', 'l', 'c', 's', 'score', 'skipped', 'mssim']


def write_compare(clip_reports, mssim, out_dir, stem, emit=('csv', 'json'), extra=None):
    """clip_reports[i] is the SimilarityReport of clip i; mssim[i] the classic SSIM baseline."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if 'csv' in emit:
        rows = ([report.pair_id, metric, l, c, s, score, int(skipped), value]
                for report, value in zip(clip_reports, mssim)
                for metric, l, c, s, score, skipped in report.rows())
        paths.append(_write_csv(os.path.join(out_dir, f"{stem}.csv"), COMPARE_HEADER, rows))
    if 'json' in emit:
        document = dict(extra or {})
        document['clips'] = [dict(report.as_dict(), mssim=value) for report, value in zip(clip_reports, mssim)]
        paths.append(_write_json(os.path.join(out_dir, f"{stem}.json"), document))
    return paths


AUDIT_HEADER = ['rank', 'query_clip', 'corpus_file', 'corpus_clip', 'score', 'ssimuse_b', 'ssimuse_v']


def write_audit(ranked, out_dir, stem, emit=('csv', 'json')):
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if 'csv' in emit:
        paths.append(_write_csv(os.path.join(out_dir, f"{stem}.csv"), AUDIT_HEADER,
                                ([i + 1, *match.as_row()] for i, match in enumerate(ranked))))
    if 'json' in emit:
        paths.append(_write_json(os.path.join(out_dir, f"{stem}.json"),
                                 [dict(zip(AUDIT_HEADER, [i + 1, *match.as_row()])) for i, match in enumerate(ranked)]))
    return paths
