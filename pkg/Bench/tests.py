import csv
import json
import os
import shutil
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase, TestCase, override_settings
from scipy import special
from scipy import stats as oracle

from Metrics.ssimuse_b import BParams
from Metrics.ssimuse_v import VParams
from Rolls.corpus import CorpusLoad, Piece
from Rolls.factories import clip_to_midi_bytes, midi_bytes, phrase_clip, random_clip, random_corpus
from Rolls.pianoroll import Clip, Flavor, PianoRoll, paste_segment

from .audit import EmptyCorpus, audit_corpus, ranking_score
from .battery import Mode, run_battery, run_bench, score_pair
from .forms import BenchConfigForm, ConfigError, SweepConfigForm, bind_config, read_config
from .models import BenchRun, RunLog
from .stats import InsufficientGroups, chi2_sf, describe, gammaincc, kruskal_wallis, midranks
from .sweep import SweepConfig, SweepParameter, run_sweep
from .synthesis import (
    BASELINE, BenchConfig, InsufficientCorpus, baseline_pairs, build_pools, level_pairs, synthesize_targets,
)


class KruskalWallisTests(SimpleTestCase):
    def test_two_separated_groups(self):
        result = kruskal_wallis([[1, 2, 3], [4, 5, 6]])
        self.assertAlmostEqual(result.h, 3.857, delta=1e-3)
        self.assertEqual(result.df, 1)
        expected = oracle.kruskal([1, 2, 3], [4, 5, 6])
        self.assertAlmostEqual(result.h, expected.statistic, delta=1e-12)
        self.assertAlmostEqual(result.p, expected.pvalue, delta=1e-6)

    def test_identical_groups(self):
        result = kruskal_wallis([[1, 2, 3], [1, 2, 3]])
        self.assertAlmostEqual(result.h, 0.0, delta=1e-9)
        self.assertAlmostEqual(result.p, 1.0, delta=1e-6)

    def test_all_observations_identical(self):
        result = kruskal_wallis([[0.5, 0.5], [0.5, 0.5, 0.5]])
        self.assertEqual((result.h, result.p, result.degenerate), (0.0, 1.0, True))

    def test_five_increasing_groups_are_significant(self):
        rng = np.random.default_rng(3)
        groups = [level + rng.random(10) for level in range(5)]
        result = kruskal_wallis(groups)
        self.assertEqual(result.df, 4)
        self.assertLess(result.p, 0.05)
        self.assertAlmostEqual(result.p, oracle.kruskal(*groups).pvalue, delta=1e-6)

    def test_matches_oracle_on_random_configurations(self):
        rng = np.random.default_rng(20)
        for _ in range(20):
            groups = [rng.integers(0, 8, size=int(rng.integers(2, 12))).astype(float)
                      for _ in range(int(rng.integers(2, 6)))]
            if len(np.unique(np.concatenate(groups))) == 1:
                continue
            expected = oracle.kruskal(*groups)
            result = kruskal_wallis(groups)
            self.assertAlmostEqual(result.h, expected.statistic, delta=1e-9)
            self.assertAlmostEqual(result.p, expected.pvalue, delta=1e-6)

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(21)
        groups = [rng.random(8), rng.random(9) + 0.3, rng.random(7) + 0.6]
        transformed = [np.exp(3 * g) - 2 for g in groups]
        self.assertAlmostEqual(kruskal_wallis(groups).h, kruskal_wallis(transformed).h, delta=1e-12)

    def test_insufficient_groups(self):
        with self.assertRaises(InsufficientGroups):
            kruskal_wallis([[1, 2, 3]])
        with self.assertRaises(InsufficientGroups):
            kruskal_wallis([[1, 2], []])
        with self.assertRaises(InsufficientGroups):
            kruskal_wallis([[1], [2]])

    def test_midranks(self):
        ranks, counts = midranks([10, 20, 20, 30])
        self.assertEqual(ranks.tolist(), [1.0, 2.5, 2.5, 4.0])
        self.assertEqual(sorted(counts.tolist()), [1, 1, 2])


class ChiSquareTests(SimpleTestCase):
    def test_gammaincc_matches_oracle(self):
        for a in (0.5, 1.0, 1.5, 2.0, 4.5, 10.0):
            for x in (0.01, 0.5, 1.0, 3.0, 7.5, 20.0, 60.0):
                self.assertAlmostEqual(gammaincc(a, x), special.gammaincc(a, x), delta=1e-10)

    def test_chi2_sf_matches_oracle(self):
        for df in (1, 2, 3, 4, 9):
            for x in (0.0, 0.1, 1.0, 3.857, 9.49, 30.0):
                self.assertAlmostEqual(chi2_sf(x, df), oracle.chi2.sf(x, df), delta=1e-10)

    def test_domain(self):
        self.assertEqual(gammaincc(2.0, 0.0), 1.0)
        with self.assertRaises(ValueError):
            gammaincc(0, 1.0)
        with self.assertRaises(ValueError):
            gammaincc(1.0, -1.0)


class DescribeTests(SimpleTestCase):
    def test_sample_std(self):
        d = describe([1.0, 2.0, 3.0, 4.0])
        self.assertEqual((d.mean, d.n), (2.5, 4))
        self.assertAlmostEqual(d.std, np.std([1, 2, 3, 4], ddof=1), delta=1e-12)

    def test_small_samples(self):
        self.assertEqual(describe([0.7]), (0.7, 0.0, 1))
        self.assertEqual(describe([]).n, 0)


def _config(**kwargs):
    values = dict(seed=7, set_size=20, synthetics_per_reference=5, levels=(1, 2, 4, 8))
    values.update(kwargs)
    return BenchConfig(**values)


def sweep_mean(rows, value, level):
    for row in rows:
        if row.value == value and row.level == str(level):
            return row.mean_s
    raise KeyError((value, level))


class PoolTests(SimpleTestCase):
    def test_pools_are_disjoint_by_piece(self):
        cfg = _config()
        pools = build_pools(random_corpus(40, seed=1, clips_per_piece=2), cfg)
        self.assertEqual((len(pools.reference), len(pools.mixture)), (20, 20))
        reference = {clip.source_id for clip in pools.reference}
        mixture = {clip.source_id for clip in pools.mixture}
        self.assertEqual(len(reference), 20)
        self.assertEqual(len(mixture), 20)
        self.assertFalse(reference & mixture)

    def test_same_seed_same_pools(self):
        corpus = random_corpus(45, seed=2)
        first = build_pools(corpus, _config())
        second = build_pools(corpus, _config())
        self.assertEqual([c.origin for c in first.reference], [c.origin for c in second.reference])
        self.assertEqual([c.origin for c in first.mixture], [c.origin for c in second.mixture])
        other = build_pools(corpus, _config(seed=8))
        self.assertNotEqual([c.origin for c in first.reference], [c.origin for c in other.reference])

    def test_insufficient_corpus(self):
        with self.assertRaises(InsufficientCorpus):
            build_pools(random_corpus(30, seed=3), _config())

    def test_silent_clips_are_not_drawn(self):
        corpus = random_corpus(6, seed=4)
        silent = Clip(PianoRoll(np.zeros((256, 128), dtype=np.int16), flavor=Flavor.VELOCITY), 'silent.mid')
        with self.assertRaises(InsufficientCorpus):
            build_pools(corpus[:3] + [silent] * 3, _config(set_size=2))
        self.assertEqual(len(build_pools(corpus + [silent], _config(set_size=3)).mixture), 3)

    def test_config_validation(self):
        with self.assertRaises(ValueError):
            _config(levels=(1, 17))
        with self.assertRaises(ValueError):
            _config(seed=2 ** 64)
        with self.assertRaises(ValueError):
            _config(clip_steps=250)
        self.assertEqual(_config().pairs_per_level, 100)


class SynthesisTests(SimpleTestCase):
    def setUp(self):
        self.cfg = _config(set_size=4, synthetics_per_reference=3)
        self.pools = build_pools(random_corpus(8, seed=5), self.cfg)

    def test_full_clip_copy_equals_reference(self):
        for pair in synthesize_targets(self.pools.reference, self.pools.mixture, 16, self.cfg):
            self.assertEqual(pair.target.roll, pair.reference.roll)

    def test_one_bar_changes_one_bar_of_the_mixture(self):
        for pair in synthesize_targets(self.pools.reference, self.pools.mixture, 1, self.cfg):
            parent = self.pools.mixture[pair.mixture_index]
            changed = np.flatnonzero((pair.target.roll.grid != parent.roll.grid).any(axis=1))
            lo, hi = pair.dst_bar * 16, pair.dst_bar * 16 + 16
            self.assertTrue(((changed >= lo) & (changed < hi)).all())
            self.assertTrue(np.array_equal(pair.target.roll.grid[lo:hi],
                                           pair.reference.roll.grid[pair.src_bar * 16:pair.src_bar * 16 + 16]))

    def test_pair_counts(self):
        self.assertEqual(len(synthesize_targets(self.pools.reference, self.pools.mixture, 2, self.cfg)), 12)
        self.assertEqual(len(baseline_pairs(self.pools.reference, self.pools.mixture, self.cfg)), 12)
        groups = level_pairs(self.pools, self.cfg)
        self.assertEqual(list(groups), [BASELINE, 1, 2, 4, 8])
        self.assertTrue(all(len(pairs) == 12 for pairs in groups.values()))

    def test_mixture_not_repeated_within_one_reference(self):
        pairs = synthesize_targets(self.pools.reference, self.pools.mixture, 4, self.cfg)
        for start in range(0, len(pairs), 3):
            picks = [pair.mixture_index for pair in pairs[start:start + 3]]
            self.assertEqual(len(set(picks)), 3)

    def test_levels_are_reproducible(self):
        first = synthesize_targets(self.pools.reference, self.pools.mixture, 2, self.cfg)
        second = synthesize_targets(self.pools.reference, self.pools.mixture, 2, self.cfg)
        self.assertEqual([p[2:] for p in first], [p[2:] for p in second])

    def test_invalid_level(self):
        with self.assertRaises(ValueError):
            synthesize_targets(self.pools.reference, self.pools.mixture, 17, self.cfg)


class BatteryTests(SimpleTestCase):
    def test_identical_pairs_score_one(self):
        clips = random_corpus(5, seed=9)
        reports = run_battery([(c, c) for c in clips], Mode.BOTH)
        self.assertEqual([r.pair_id for r in reports], list(range(5)))
        for report in reports:
            self.assertAlmostEqual(report.b.ssimuse_b, 1.0, delta=1e-9)
            self.assertAlmostEqual(report.v.ssimuse_v, 1.0, delta=1e-9)

    def test_cardinality_and_mode(self):
        clips = random_corpus(6, seed=10)
        pairs = list(zip(clips, clips[1:]))
        reports = run_battery(pairs, Mode.BINARY)
        self.assertEqual(len(reports), 5)
        self.assertTrue(all(r.v is None and r.b is not None for r in reports))
        reports = run_battery(pairs, 'velocity')
        self.assertTrue(all(r.b is None and r.v is not None for r in reports))

    def test_silent_clip_is_skipped_not_fatal(self):
        clip = random_clip(np.random.default_rng(11))
        silent = Clip(PianoRoll(np.zeros((256, 128), dtype=np.int16), flavor=Flavor.VELOCITY))
        report = score_pair(0, clip, silent, Mode.BOTH, BParams(), VParams())
        self.assertIsNone(report.v)
        self.assertTrue(report.skipped)
        self.assertEqual(report.b.s, 0.0)
        self.assertEqual(report.rows()[-1], ('ssimuse_v', '', '', '', '', True))

    def test_parallel_matches_serial(self):
        clips = random_corpus(6, seed=12)
        pairs = list(zip(clips, reversed(clips)))
        serial = run_battery(pairs, Mode.BOTH, workers=1)
        parallel = run_battery(pairs, Mode.BOTH, workers=2)
        self.assertEqual([r.as_dict() for r in serial], [r.as_dict() for r in parallel])

    def test_level_sixteen_is_exact_copy(self):
        cfg = _config(set_size=5, synthetics_per_reference=2, levels=(16,))
        pools = build_pools(random_corpus(10, seed=13), cfg)
        pairs = synthesize_targets(pools.reference, pools.mixture, 16, cfg)
        for report in run_battery([(p.target, p.reference) for p in pairs], Mode.BINARY):
            self.assertAlmostEqual(report.b.ssimuse_b, 1.0, delta=1e-9)

    def test_empty_input(self):
        with self.assertRaises(ValueError):
            run_battery([])


class DeskBenchTests(SimpleTestCase):
    """Forced replication at desk scale: 20 references, 5 targets each, 40-piece corpus."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.cfg = _config()
        cls.result = run_bench(random_corpus(40, seed=101), cls.cfg)

    def test_group_sizes(self):
        self.assertEqual(list(self.result.groups), [BASELINE, 1, 2, 4, 8])
        for reports in self.result.groups.values():
            self.assertEqual(len(reports), 100)
        self.assertEqual(self.result.skipped, 0)

    def test_ssimuse_b_rises_with_replication(self):
        means = [self.result.mean(level, 'ssimuse_b') for level in self.result.groups]
        self.assertEqual(means, sorted(means))
        self.assertEqual(len(set(means)), len(means))

    def test_ssimuse_v_rises_with_replication(self):
        means = [self.result.mean(level, 'ssimuse_v') for level in self.result.groups]
        self.assertEqual(means, sorted(means))
        self.assertEqual(len(set(means)), len(means))

    def test_levels_are_significantly_different(self):
        for metric in ('ssimuse_b', 'ssimuse_v'):
            self.assertLess(self.result.kw[metric].p, 0.05)
            self.assertEqual(self.result.kw[metric].df, 4)

    def test_one_bar_is_detectable(self):
        baseline = [row for row in self.result.summary
                    if row.level == BASELINE and row.component == 'ssimuse_b.s'][0]
        self.assertGreater(self.result.mean(1, 'ssimuse_b.s'), baseline.mean + baseline.std)

    def test_summary_components(self):
        components = {row.component for row in self.result.summary}
        self.assertEqual(components, {
            'ssimuse_b.l', 'ssimuse_b.s', 'ssimuse_b',
            'ssimuse_v.l', 'ssimuse_v.c', 'ssimuse_v.s', 'ssimuse_v',
        })


class SweepTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.base = _config(clip_steps=128, set_size=10, synthetics_per_reference=3, levels=(1, 2, 4), mode='binary')
        cls.corpus = random_corpus(20, seed=202, steps=128)

    def sweep(self, parameter):
        values = SweepConfig.default_values(parameter)
        return values, run_sweep(SweepConfig(parameter, values, self.base), self.corpus)

    def test_weight_exponent_orders_scores(self):
        values, rows = self.sweep(SweepParameter.WEIGHT_EXPONENT)
        self.assertEqual(len(rows), 3 * 4)
        for level in (BASELINE, 1, 2, 4):
            means = [sweep_mean(rows, value, level) for value in values]
            self.assertLessEqual(means[0], means[1] + 1e-12)
            self.assertLessEqual(means[1], means[2] + 1e-12)

    def test_larger_windows_lower_s(self):
        _, rows = self.sweep(SweepParameter.WINDOW_STEPS)
        for level in (BASELINE, 1, 2, 4):
            self.assertLessEqual(sweep_mean(rows, 32, level), sweep_mean(rows, 16, level))

    def test_hop_keeps_level_ordering(self):
        values, rows = self.sweep(SweepParameter.HOP_STEPS)
        for value in values:
            means = [sweep_mean(rows, value, level) for level in (BASELINE, 1, 2, 4)]
            self.assertEqual(means, sorted(means))


class HopSweepTests(SimpleTestCase):
    """Hop sizes 4, 8 and 16 on repeated-phrase pieces: per-level means stay within 0.05."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        base = _config(set_size=10, synthetics_per_reference=3, mode='binary')
        corpus = random_corpus(20, seed=303, factory=phrase_clip)
        values = SweepConfig.default_values(SweepParameter.HOP_STEPS)
        cls.values = values
        cls.rows = run_sweep(SweepConfig(SweepParameter.HOP_STEPS, values, base), corpus)

    def test_rows_cover_every_hop_and_level(self):
        self.assertEqual(len(self.rows), len(self.values) * 5)
        self.assertTrue(all(row.n == 30 for row in self.rows))

    def test_level_means_agree_across_hops(self):
        for level in (BASELINE, 1, 2, 4, 8):
            means = [sweep_mean(self.rows, value, level) for value in self.values]
            self.assertLessEqual(max(means) - min(means), 0.05, (level, means))


class AuditTests(SimpleTestCase):
    def test_ranking_score(self):
        clip = random_clip(np.random.default_rng(30))
        report = score_pair(0, clip, clip, Mode.BOTH, BParams(), VParams())
        self.assertAlmostEqual(ranking_score(report, Mode.BOTH), 1.0, delta=1e-9)
        self.assertEqual(ranking_score(report, Mode.BINARY), report.b.ssimuse_b)

    def test_empty_corpus(self):
        query = Piece(path=Path('q.mid'), clips=[random_clip(np.random.default_rng(31))])
        with self.assertRaises(EmptyCorpus):
            audit_corpus(query, CorpusLoad())


class ConfigFormTests(SimpleTestCase):
    def setUp(self):
        self.dir = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, self.dir, ignore_errors=True)

    def write(self, text):
        path = os.path.join(self.dir, 'bench.json')
        with open(path, 'w') as f:
            f.write(text)
        return path

    def test_file_values_and_overrides(self):
        data, text = read_config(self.write(json.dumps({
            'corpus': '.', 'seed': 7, 'set_size': 4, 'levels': [1, 2], 'window_steps': 8,
        }, indent=2)))
        self.assertEqual(data['corpus'], os.path.join(self.dir, '.'))
        form = bind_config(BenchConfigForm, data, {'seed': '9', 'levels': '1,4'}, text)
        cfg = form.bench_config
        self.assertEqual((cfg.seed, cfg.set_size, cfg.levels), (9, 4, (1, 4)))
        self.assertEqual(form.b_params().window_steps, 8)
        self.assertEqual(form.cleaned_data['emit'], ['csv'])

    def test_json_errors_report_line_and_column(self):
        path = self.write('{\n  "seed": 7,\n  "set_size": ,\n}')
        with self.assertRaisesRegex(ConfigError, r'bench\.json:3:\d+'):
            read_config(path)

    def test_field_errors_report_line(self):
        path = self.write('{\n  "corpus": ".",\n  "seed": 7,\n  "lam": 3\n}')
        data, text = read_config(path)
        with self.assertRaisesRegex(ConfigError, r'lam \(line 4\)'):
            bind_config(BenchConfigForm, data, text=text)

    def test_unknown_field(self):
        data, text = read_config(self.write('{"corpus": ".", "seed": 1, "sets": 3}'))
        with self.assertRaisesRegex(ConfigError, "unknown field 'sets'"):
            bind_config(BenchConfigForm, data, text=text)

    @override_settings(SSIMUSE_SEED=None)
    def test_seed_is_required(self):
        form = BenchConfigForm(data={'corpus': self.dir})
        self.assertFalse(form.is_valid())
        self.assertIn('seed', form.errors)

    @override_settings(SSIMUSE_SEED='123')
    def test_seed_falls_back_to_environment(self):
        form = BenchConfigForm(data={'corpus': self.dir})
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.bench_config.seed, 123)

    def test_levels_must_fit_the_clip(self):
        form = BenchConfigForm(data={'corpus': self.dir, 'seed': 1, 'levels': '1,32'})
        self.assertFalse(form.is_valid())

    def test_sweep_aliases_and_defaults(self):
        form = SweepConfigForm(data={'corpus': self.dir, 'seed': 1, 'parameter': 'window'})
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.sweep_config.parameter, SweepParameter.WINDOW_STEPS)
        self.assertEqual(form.sweep_config.values, (8, 16, 32))

        form = SweepConfigForm(data={'corpus': self.dir, 'seed': 1, 'parameter': 'hop', 'values': '4,8.5'})
        self.assertFalse(form.is_valid())
        form = SweepConfigForm(data={'corpus': self.dir, 'seed': 1, 'parameter': 'tempo'})
        self.assertIn('parameter', form.errors)


class CommandTestCase(TestCase):
    def setUp(self):
        self.dir = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, self.dir, ignore_errors=True)
        self.out = os.path.join(self.dir, 'out')

    def write(self, name, data, folder=None):
        folder = folder or self.dir
        os.makedirs(folder, exist_ok=True)
        path = os.path.join(folder, name)
        with open(path, 'wb' if isinstance(data, bytes) else 'w') as f:
            f.write(data)
        return path

    def call(self, *args, **options):
        stdout = StringIO()
        options.setdefault('workers', 1)
        call_command(*args, stdout=stdout, **options)
        return stdout.getvalue()

    def assertExitCode(self, code, *args, **options):
        with self.assertRaises(CommandError) as ctx:
            self.call(*args, **options)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception


class CompareCommandTests(CommandTestCase):
    def test_file_against_itself(self):
        path = self.write('song.mid', clip_to_midi_bytes(random_clip(np.random.default_rng(40))))
        output = self.call('compare', path, path, out=self.out)
        self.assertIn('Best clip 0', output)
        with open(os.path.join(self.out, 'compare_song_song.json')) as f:
            document = json.load(f)
        self.assertAlmostEqual(document['best_score'], 1.0, delta=1e-9)
        self.assertAlmostEqual(document['clips'][0]['ssimuse_b']['ssimuse_b'], 1.0, delta=1e-9)
        self.assertAlmostEqual(document['clips'][0]['mssim'], 1.0, delta=1e-9)
        with open(os.path.join(self.out, 'compare_song_song.csv')) as f:
            rows = list(csv.DictReader(f))
        self.assertEqual([row['metric'] for row in rows], ['ssimuse_b', 'ssimuse_v'])
        self.assertEqual(RunLog.objects.filter(action='COMPARE').count(), 1)

    def test_clip_by_clip_up_to_the_shorter_piece(self):
        rng = np.random.default_rng(41)
        long_grid = np.concatenate([random_clip(rng).roll.grid, random_clip(rng).roll.grid])
        long_grid[-1, 60] = 90
        long_clip = Clip(PianoRoll(long_grid, flavor=Flavor.VELOCITY))
        a = self.write('long.mid', clip_to_midi_bytes(long_clip))
        b = self.write('short.mid', clip_to_midi_bytes(random_clip(rng)))
        self.call('compare', a, b, out=self.out, emit='json')
        with open(os.path.join(self.out, 'compare_long_short.json')) as f:
            document = json.load(f)
        self.assertEqual((document['clips_a'], document['clips_b']), (2, 1))
        self.assertEqual(len(document['clips']), 1)

    def test_three_four_is_rejected(self):
        a = self.write('a.mid', midi_bytes([('piano', [(0, 60, 80, 120)])]))
        b = self.write('b.mid', midi_bytes([('piano', [(0, 60, 80, 120)])], time_signature=(3, 4)))
        error = self.assertExitCode(2, 'compare', a, b, out=self.out)
        self.assertIn('Rejected', str(error))
        self.assertEqual(RunLog.objects.filter(action='REJECTED').count(), 1)

    def test_unreadable_file(self):
        a = self.write('a.mid', midi_bytes([('piano', [(0, 60, 80, 120)])]))
        b = self.write('b.mid', b'this is not midi')
        self.assertExitCode(1, 'compare', a, b, out=self.out)
        self.assertExitCode(1, 'compare', a, os.path.join(self.dir, 'missing.mid'), out=self.out)

    def test_bad_parameter_is_a_config_error(self):
        a = self.write('a.mid', midi_bytes([('piano', [(0, 60, 80, 120)])]))
        self.assertExitCode(3, 'compare', a, a, out=self.out, lam=2.0)
        self.assertExitCode(3, 'compare', a, a, out=self.out, emit='svg')

    def test_dump_rolls(self):
        path = self.write('song.mid', clip_to_midi_bytes(random_clip(np.random.default_rng(42))))
        self.call('compare', path, path, out=self.out, dump_rolls=True, mode='binary')
        for name in ('compare_song_song_a0.png', 'compare_song_song_b0.csv'):
            self.assertTrue(os.path.exists(os.path.join(self.out, name)))

    def test_short_piece_is_padded(self):
        path = self.write('lick.mid', midi_bytes([('piano', [(0, 60, 80, 120), (240, 64, 90, 120)])]))
        output = self.call('compare', path, path, out=self.out, mode='binary')
        self.assertIn('clip 0:', output)


class AuditCommandTests(CommandTestCase):
    def setUp(self):
        super().setUp()
        rng = np.random.default_rng(50)
        self.corpus = os.path.join(self.dir, 'corpus')
        self.query_clip = random_clip(rng, density=0.3)
        self.query = self.write('query.mid', clip_to_midi_bytes(self.query_clip))
        for index in range(5):
            self.write(f'other{index}.mid', clip_to_midi_bytes(random_clip(rng, density=0.3)), self.corpus)
        self.rng = rng

    def ranked(self, stem='audit_query'):
        with open(os.path.join(self.out, f'{stem}.json')) as f:
            return json.load(f)

    def test_query_in_corpus_ranks_first(self):
        self.write('query.mid', clip_to_midi_bytes(self.query_clip), self.corpus)
        self.call('audit', self.query, self.corpus, out=self.out, top_k=3)
        ranked = self.ranked()
        self.assertEqual(len(ranked), 3)
        self.assertEqual(ranked[0]['corpus_file'], 'query.mid')
        self.assertAlmostEqual(ranked[0]['score'], 1.0, delta=1e-9)
        self.assertEqual([r['rank'] for r in ranked], [1, 2, 3])

    def test_top_k_is_clamped(self):
        self.call('audit', self.query, self.corpus, out=self.out, top_k=50, mode='binary')
        self.assertEqual(len(self.ranked()), 5)

    def test_planted_copy_ranks_above_other_files(self):
        mixture = random_clip(self.rng, density=0.3)
        planted = paste_segment(mixture, self.query_clip, 4, 4, 4)
        self.write('planted.mid', clip_to_midi_bytes(planted), self.corpus)
        self.call('audit', self.query, self.corpus, out=self.out, mode='binary')
        self.assertEqual(self.ranked()[0]['corpus_file'], 'planted.mid')

    def test_empty_corpus(self):
        empty = os.path.join(self.dir, 'empty')
        os.makedirs(empty)
        self.assertExitCode(1, 'audit', self.query, empty, out=self.out)
        self.assertExitCode(1, 'audit', self.query, os.path.join(self.dir, 'nowhere'), out=self.out)


class BenchCommandTests(CommandTestCase):
    def setUp(self):
        super().setUp()
        self.corpus = os.path.join(self.dir, 'tiny')
        for clip in random_corpus(10, seed=60):
            self.write(clip.source_id, clip_to_midi_bytes(clip), self.corpus)

    def config(self, **values):
        document = {'corpus': 'tiny', 'set_size': 4, 'synthetics_per_reference': 2, 'levels': [1, 2], 'seed': 7}
        document.update(values)
        return self.write('bench.json', json.dumps(document, indent=2))

    def test_outputs_and_ledger(self):
        output = self.call('bench', self.config(), out=self.out, emit='csv,json,svg,pdf')
        self.assertIn('Kruskal-Wallis ssimuse_b', output)
        for name in ('bench_tiny_rows.csv', 'bench_tiny_summary.csv', 'bench_tiny_stats.csv',
                     'bench_tiny.json', 'bench_tiny_ssimuse_b.svg', 'bench_tiny.pdf'):
            self.assertTrue(os.path.exists(os.path.join(self.out, name)), name)
        with open(os.path.join(self.out, 'bench_tiny_rows.csv')) as f:
            rows = list(csv.DictReader(f))
        self.assertEqual(list(rows[0]), ['corpus', 'mode', 'level', 'pair_id', 'l', 'c', 's', 'score', 'skipped'])
        self.assertEqual(len(rows), 3 * 8 * 2)
        with open(os.path.join(self.out, 'bench_tiny_stats.csv')) as f:
            self.assertEqual(f.readline().strip(), 'metric,H,df,p')

        run = BenchRun.objects.get()
        self.assertEqual((run.kind, run.corpus, run.seed, run.pair_count), ('BENCH', 'tiny', '7', 24))
        self.assertIn('ssimuse_b', run.stats)
        self.assertEqual(RunLog.objects.filter(action='BENCH').count(), 1)

    def test_identical_runs_write_identical_files(self):
        first, second = os.path.join(self.dir, 'first'), os.path.join(self.dir, 'second')
        self.call('bench', self.config(), out=first, emit='csv,json,svg')
        self.call('bench', self.config(), out=second, emit='csv,json,svg')
        self.assertEqual(sorted(os.listdir(first)), sorted(os.listdir(second)))
        for name in os.listdir(first):
            with open(os.path.join(first, name), 'rb') as a, open(os.path.join(second, name), 'rb') as b:
                self.assertEqual(a.read(), b.read(), name)

    def test_flags_override_the_file(self):
        self.call('bench', self.config(), out=self.out, seed='8', levels='1', mode='binary')
        run = BenchRun.objects.get()
        self.assertEqual((run.seed, run.mode, run.config['levels']), ('8', 'binary', [1]))

    @override_settings(SSIMUSE_SEED=None)
    def test_missing_seed(self):
        path = self.write('bench.json', json.dumps({'corpus': 'tiny', 'set_size': 4}))
        error = self.assertExitCode(3, 'bench', path, out=self.out)
        self.assertIn('seed', str(error))

    def test_malformed_config(self):
        path = self.write('bench.json', '{"corpus": "tiny",\n "seed": }')
        error = self.assertExitCode(3, 'bench', path, out=self.out)
        self.assertIn('bench.json:2:', str(error))

    def test_insufficient_corpus(self):
        self.assertExitCode(1, 'bench', self.config(set_size=6), out=self.out)

    def test_sweep(self):
        self.call('sweep', self.config(), out=self.out, parameter='weight-exp', values='1,2', emit='csv,svg')
        with open(os.path.join(self.out, 'sweep_tiny_weight_exponent.csv')) as f:
            rows = list(csv.DictReader(f))
        self.assertEqual(len(rows), 2 * 3)
        self.assertEqual(list(rows[0]), ['parameter', 'value', 'level', 'mean_s', 'std_s', 'n'])
        self.assertTrue(os.path.exists(os.path.join(self.out, 'sweep_tiny_weight_exponent.svg')))
        self.assertEqual(BenchRun.objects.get().kind, 'SWEEP')
