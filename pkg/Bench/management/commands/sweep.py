from Bench.emit import write_sweep
from Bench.forms import SweepConfigForm
from Bench.models import BenchRun, RunLog
from Bench.sweep import run_sweep
from Bench.synthesis import InsufficientCorpus

from ._common import INPUT_ERROR
from .bench import Command as BenchCommand


class Command(BenchCommand):
    help = 'Sweep one SSIMuse-B hyperparameter and report mean s per replication level.'
    action = 'SWEEP'
    form_class = SweepConfigForm

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--parameter', help='window, hop or weight-exp.')
        parser.add_argument('--values', help='Comma separated parameter values.')

    def handle(self, *args, **options):
        form = self.load_form(options)
        sweep = form.sweep_config
        name = form.corpus_name
        self.stdout.write(f"Sweep {sweep.parameter} over {list(sweep.values)} on {name}, seed {sweep.base.seed}")

        try:
            rows = run_sweep(sweep, self.load_corpus(form), form.b_params(), workers=form.worker_count)
        except InsufficientCorpus as e:
            self.fail(f"{name}: {e}", INPUT_ERROR)

        for row in rows:
            self.stdout.write(f"{row.parameter}={row.value:<6} {row.level:>8}  s {row.mean_s:.4f} +/- {row.std_s:.4f}")
        emit = [kind for kind in form.cleaned_data['emit'] if kind != 'pdf']
        self.report_paths(write_sweep(rows, form.out_dir, name, emit))

        config = {'parameter': str(sweep.parameter), 'values': list(sweep.values), 'seed': str(sweep.base.seed),
                  'set_size': sweep.base.set_size, 'levels': list(sweep.base.levels)}
        BenchRun.record('SWEEP', name, 'binary', sweep.base.seed, config,
                        pair_count=len(rows) and sum(row.n for row in rows) // len(sweep.values))
        RunLog.log_action('SWEEP', f"{name} {sweep.parameter}={list(sweep.values)} seed={sweep.base.seed}")
