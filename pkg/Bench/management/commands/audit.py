import os
from pathlib import Path

from django.conf import settings

from Bench.audit import EmptyCorpus, audit_corpus
from Bench.emit import write_audit
from Bench.forms import AuditForm
from Bench.models import RunLog
from Rolls.corpus import load_corpus, load_piece
from SSIMuse.exceptions import SSIMuseError

from ._common import INPUT_ERROR, SSIMuseCommand


class Command(SSIMuseCommand):
    help = 'Rank every clip of a corpus by similarity to a query MIDI file.'
    action = 'AUDIT'

    def add_arguments(self, parser):
        parser.add_argument('query', help='Query MIDI file.')
        parser.add_argument('corpus_dir', help='Directory of MIDI files to search.')
        parser.add_argument('--top-k', type=int, default=10, help='Number of clip pairs to report (default 10).')
        self.add_metric_arguments(parser)

    def handle(self, *args, **options):
        form = self.bind(AuditForm, options=options)
        data = form.cleaned_data
        loading = dict(
            track_filter=self.track_filter(data),
            steps_per_quarter=data.get('steps_per_quarter'),
            clip_steps=settings.SSIMUSE_CLIP_STEPS,
            pad_short=True,
        )

        try:
            query = load_piece(options['query'], **loading)
        except OSError as e:
            self.fail(f"{options['query']}: {e.strerror}", INPUT_ERROR)
        except SSIMuseError as e:
            self.fail(f"{options['query']}: {e}", INPUT_ERROR)
        if query is None:
            self.reject(options['query'])

        if not os.path.isdir(options['corpus_dir']):
            self.fail(f"{options['corpus_dir']} is not a directory", INPUT_ERROR)
        corpus = load_corpus(options['corpus_dir'], **loading)

        mode = form.run_mode
        top_k = data.get('top_k') or 10
        try:
            ranked = audit_corpus(query, corpus, mode, top_k, form.b_params(), form.v_params(),
                                  workers=form.worker_count)
        except EmptyCorpus as e:
            self.fail(f"{options['corpus_dir']}: {e}", INPUT_ERROR)

        self.stdout.write(f"{'rank':>4}  {'score':>7}  {'query clip':>10}  corpus clip")
        for rank, match in enumerate(ranked, start=1):
            self.stdout.write(
                f"{rank:>4}  {match.score:7.4f}  {match.query_clip:>10}  {match.corpus_file}#{match.corpus_clip}"
            )
        paths = write_audit(ranked, form.out_dir, f"audit_{Path(query.name).stem}", data['emit'])
        self.report_paths(paths)

        best = f"{ranked[0].corpus_file}#{ranked[0].corpus_clip} {ranked[0].score:.4f}" if ranked else 'no match'
        RunLog.log_action('AUDIT', f"{query.name} against {options['corpus_dir']} ({mode.value}): {best}")
