import os
from pathlib import Path

from django.conf import settings

from Bench.audit import compare_pieces
from Bench.emit import write_compare
from Bench.forms import RunOptionsForm
from Bench.models import RunLog
from Rolls.corpus import load_piece
from Rolls.pianoroll import dump_csv, dump_image
from SSIMuse.exceptions import SSIMuseError

from ._common import INPUT_ERROR, SSIMuseCommand


def _fmt(value):
    return f"{value:.4f}" if isinstance(value, float) else '-'


class Command(SSIMuseCommand):
    help = 'Compare two MIDI files clip by clip with SSIMuse-B and/or SSIMuse-V.'
    action = 'COMPARE'

    def add_arguments(self, parser):
        parser.add_argument('a', help='First MIDI file.')
        parser.add_argument('b', help='Second MIDI file.')
        parser.add_argument('--dump-rolls', action='store_true', help='Also write each compared clip as PNG and CSV.')
        self.add_metric_arguments(parser)

    def load(self, path, form):
        try:
            piece = load_piece(
                path,
                track_filter=self.track_filter(form.cleaned_data),
                steps_per_quarter=form.cleaned_data.get('steps_per_quarter'),
                clip_steps=settings.SSIMUSE_CLIP_STEPS,
                pad_short=True,
            )
        except OSError as e:
            self.fail(f"{path}: {e.strerror}", INPUT_ERROR)
        except SSIMuseError as e:
            self.fail(f"{path}: {e}", INPUT_ERROR)
        if piece is None:
            self.reject(path)
        return piece

    def handle(self, *args, **options):
        form = self.bind(RunOptionsForm, options=options)
        a = self.load(options['a'], form)
        b = self.load(options['b'], form)
        mode = form.run_mode

        try:
            result = compare_pieces(a, b, mode, form.b_params(), form.v_params(), workers=form.worker_count)
        except SSIMuseError as e:
            self.fail(str(e), INPUT_ERROR)

        stem = f"compare_{Path(a.name).stem}_{Path(b.name).stem}"
        extra = {
            'a': a.name,
            'b': b.name,
            'mode': mode.value,
            'clips_a': result.clips_a,
            'clips_b': result.clips_b,
            'best_clip': result.best_clip,
            'best_score': result.best_score,
        }
        paths = write_compare(result.reports, result.mssim, form.out_dir, stem, form.cleaned_data['emit'], extra)

        if options['dump_rolls']:
            os.makedirs(form.out_dir, exist_ok=True)
            for label, piece in (('a', a), ('b', b)):
                for index, clip in enumerate(piece.clips[:len(result.reports)]):
                    base = os.path.join(form.out_dir, f"{stem}_{label}{index}")
                    dump_image(clip.roll, f"{base}.png")
                    dump_csv(clip.roll, f"{base}.csv")
                    paths.extend([f"{base}.png", f"{base}.csv"])

        for report, mssim in zip(result.reports, result.mssim):
            b_part = report.b
            v_part = report.v
            line = f"clip {report.pair_id}:"
            if b_part is not None:
                line += f" SSIMuse-B {_fmt(b_part.ssimuse_b)} (l {_fmt(b_part.l)}, s {_fmt(b_part.s)}, shift {b_part.best_shift})"
            if v_part is not None:
                line += f" SSIMuse-V {_fmt(v_part.ssimuse_v)} (l {_fmt(v_part.l)}, c {_fmt(v_part.c)}, s {_fmt(v_part.s)})"
            elif report.skipped:
                line += " SSIMuse-V skipped (silent clip)"
            line += f" MSSIM {_fmt(mssim)}"
            self.stdout.write(line)
        if result.best_clip is not None:
            self.stdout.write(self.style.SUCCESS(f"Best clip {result.best_clip}: {result.best_score:.4f}"))
        self.report_paths(paths)

        RunLog.log_action('COMPARE', f"{a.name} vs {b.name} ({mode.value}): best {_fmt(result.best_score)}")
