"""Flags and error handling shared by the compare, audit, bench and sweep commands."""
import logging

from django.core.management.base import BaseCommand, CommandError

from Bench.battery import Mode
from Bench.emit import EMIT_CHOICES
from Bench.forms import ConfigError, bind_config
from Bench.models import RunLog
from Rolls.midi import parse_track_filter

logger = logging.getLogger('ssimuse')

INPUT_ERROR = 1
REJECTED = 2
CONFIG_ERROR = 3

# command-line flag -> config field name
FLAG_FIELDS = {
    'mode': 'mode',
    'window': 'window_steps',
    'hop': 'hop_steps',
    'weight_exp': 'weight_exponent',
    'lam': 'lam',
    'seed': 'seed',
    'set_size': 'set_size',
    'synthetics': 'synthetics_per_reference',
    'levels': 'levels',
    'out': 'out',
    'emit': 'emit',
    'workers': 'workers',
    'tracks': 'tracks',
    'steps_per_quarter': 'steps_per_quarter',
    'corpus': 'corpus',
    'name': 'name',
    'parameter': 'parameter',
    'values': 'values',
    'top_k': 'top_k',
}


class SSIMuseCommand(BaseCommand):
    action = 'ERROR'

    def add_metric_arguments(self, parser):
        parser.add_argument('--mode', choices=Mode.values, help='Which metric(s) to compute (default: both).')
        parser.add_argument('--window', type=int, help='SSIMuse-B window size in steps.')
        parser.add_argument('--hop', type=int, help='SSIMuse-B hop size in steps.')
        parser.add_argument('--weight-exp', type=float, help='Exponent of the window weights.')
        parser.add_argument('--lambda', dest='lam', type=float, help='Time-shift penalty strength in [0, 1].')
        parser.add_argument('--tracks', help='Comma separated track indices or name globs to keep.')
        parser.add_argument('--steps-per-quarter', type=int, help='Grid resolution (default 4).')
        parser.add_argument('--workers', type=int, help='Worker processes (default: available CPUs).')
        parser.add_argument('--out', help='Output directory (default: current directory).')
        parser.add_argument('--emit', help=f"Comma separated outputs among {', '.join(EMIT_CHOICES)}.")

    def add_bench_arguments(self, parser):
        parser.add_argument('config', nargs='?', help='JSON config document.')
        parser.add_argument('--corpus', help='Corpus directory (overrides the config file).')
        parser.add_argument('--name', help='Corpus name used in output file names.')
        parser.add_argument('--seed', help='64-bit unsigned seed (falls back to SSIMUSE_SEED).')
        parser.add_argument('--set-size', type=int, help='Reference and mixture pool size.')
        parser.add_argument('--synthetics', type=int, help='Synthetic targets per reference clip.')
        parser.add_argument('--levels', help='Replication levels in bars, e.g. 1,2,4,8.')

    def overrides(self, options):
        return {field: options.get(flag) for flag, field in FLAG_FIELDS.items() if options.get(flag) is not None}

    def bind(self, form_class, data=None, text='', source='command line', options=None):
        try:
            return bind_config(form_class, data or {}, self.overrides(options or {}), text, source)
        except ConfigError as e:
            self.fail(str(e), CONFIG_ERROR)

    def track_filter(self, options):
        return parse_track_filter(options.get('tracks'))

    def fail(self, message, returncode, action='ERROR'):
        RunLog.log_action(action, f"{self.action}: {message}")
        raise CommandError(message, returncode=returncode)

    def reject(self, path):
        self.fail(f"Rejected {path}: only 4/4 material is supported", REJECTED, action='REJECTED')

    def report_paths(self, paths):
        for path in paths:
            self.stdout.write(f"Wrote {path}")
