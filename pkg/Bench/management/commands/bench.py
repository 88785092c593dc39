from Bench.battery import run_bench
from Bench.emit import bench_document, kw_line, write_bench
from Bench.forms import BenchConfigForm, ConfigError, read_config
from Bench.models import BenchRun, RunLog
from Bench.synthesis import InsufficientCorpus
from Rolls.corpus import load_corpus

from ._common import CONFIG_ERROR, INPUT_ERROR, SSIMuseCommand


class Command(SSIMuseCommand):
    help = 'Run the forced-replication bench on a MIDI corpus and test level separability.'
    action = 'BENCH'
    form_class = BenchConfigForm

    def add_arguments(self, parser):
        self.add_bench_arguments(parser)
        self.add_metric_arguments(parser)

    def load_form(self, options):
        data, text, source = {}, '', 'command line'
        if options.get('config'):
            try:
                data, text = read_config(options['config'])
            except ConfigError as e:
                self.fail(str(e), CONFIG_ERROR)
            source = options['config']
        return self.bind(self.form_class, data, text, source, options)

    def load_corpus(self, form):
        data = form.cleaned_data
        corpus = load_corpus(
            data['corpus'],
            track_filter=self.track_filter(data),
            steps_per_quarter=data.get('steps_per_quarter'),
            clip_steps=form.bench_config.clip_steps,
        )
        return corpus.clips

    def handle(self, *args, **options):
        form = self.load_form(options)
        cfg = form.bench_config
        name = form.corpus_name
        self.stdout.write(f"Bench {name}: seed {cfg.seed}, mode {cfg.mode}, levels {list(cfg.levels)}")

        try:
            result = run_bench(self.load_corpus(form), cfg, form.b_params(), form.v_params(),
                               workers=form.worker_count)
        except InsufficientCorpus as e:
            self.fail(f"{name}: {e}", INPUT_ERROR)

        for row in result.summary:
            self.stdout.write(f"{row.level:>8}  {row.component:<14} {row.mean:.4f} +/- {row.std:.4f} (n={row.n})")
        for metric, res in result.kw.items():
            self.stdout.write(self.style.SUCCESS(kw_line(metric, res)))
        if result.skipped:
            self.stdout.write(self.style.WARNING(f"{result.skipped} pairs skipped for SSIMuse-V"))
        self.report_paths(write_bench(result, form.out_dir, name, form.cleaned_data['emit']))

        document = bench_document(result, name)
        BenchRun.record(
            'BENCH', name, str(cfg.mode), cfg.seed, document['config'],
            stats=document['kruskal_wallis'],
            pair_count=sum(len(group) for group in result.groups.values()),
            skipped_count=result.skipped,
        )
        RunLog.log_action('BENCH', f"{name} seed={cfg.seed} mode={cfg.mode}: "
                                   + '; '.join(kw_line(m, r) for m, r in result.kw.items()))
