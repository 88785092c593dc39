import itertools

import numpy as np
from django.test import SimpleTestCase, override_settings

from Rolls.exceptions import WrongFlavor
from Rolls.factories import random_clip, time_shift, transpose
from Rolls.pianoroll import Clip, Flavor, FoldedRoll, PianoRoll, fold_pitch_classes, to_binary

from .forms import ParamsForm
from .ssimuse_b import (
    BParams, LengthMismatch, ShapeMismatch, classic_mssim, density_l, luminance, shift_folded,
    shift_search_s, ssimuse_b, weighted_mean, weighted_window_s, window_jaccard,
)
from .ssimuse_v import (
    EmptyClip, EmptyCurve, VParams, contrast, dtw_align, dynamic_c, dynamic_l, extract_curve,
    onset_stats, ssimuse_v, structure, velocity_s,
)


def _clip(steps, cells, flavor=Flavor.VELOCITY):
    grid = np.zeros((steps, 128), dtype=np.int16)
    for step, pitch, value in cells:
        grid[step, pitch] = value
    return Clip(PianoRoll(grid, flavor=flavor))


def _rows(steps, rows, flavor=Flavor.BINARY):
    """Clip with every pitch of the given rows switched on."""
    grid = np.zeros((steps, 128), dtype=np.int16)
    grid[list(rows)] = 1
    return Clip(PianoRoll(grid, flavor=flavor))


def _folded(clip):
    return fold_pitch_classes(to_binary(clip.roll))


class DensityTests(SimpleTestCase):
    def test_equal_density_is_one(self):
        self.assertEqual(density_l(_rows(16, [0]), _rows(16, [5])), 1.0)

    def test_density_tenth_against_fifth(self):
        l = density_l(_rows(10, [0]), _rows(10, [0, 1]), c1=1e-4)
        self.assertAlmostEqual(l, 0.0401 / 0.0501, delta=1e-12)
        self.assertAlmostEqual(l, 0.8004, places=4)

    def test_both_empty_is_one(self):
        self.assertEqual(density_l(_rows(16, []), _rows(16, [])), 1.0)

    def test_luminance_formula(self):
        self.assertAlmostEqual(luminance(0.5, 0.6, 1e-4), 0.6001 / 0.6101, delta=1e-12)


class WindowJaccardTests(SimpleTestCase):
    def test_identical_disjoint_and_partial(self):
        x = np.zeros((16, 12), dtype=int)
        y = np.zeros((16, 12), dtype=int)
        x[0, 0] = x[4, 4] = 1
        y[0, 0] = 1
        self.assertEqual(window_jaccard(x, x), 1.0)
        self.assertEqual(window_jaccard(x, y), 0.5)

        a = np.zeros((16, 12), dtype=int)
        b = np.zeros((16, 12), dtype=int)
        a[0, 0] = a[1, 1] = a[2, 2] = 1
        b[5, 5] = b[6, 6] = 1
        self.assertEqual(window_jaccard(a, b), 0.0)

    def test_silent_windows_agree(self):
        silent = np.zeros((16, 12), dtype=int)
        self.assertEqual(window_jaccard(silent, silent), 1.0)

    def test_counts_are_activity_not_multiplicity(self):
        x = np.zeros((4, 12), dtype=int)
        y = np.zeros((4, 12), dtype=int)
        x[0, 0] = 3
        y[0, 0] = 1
        self.assertEqual(window_jaccard(x, y), 1.0)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeMismatch):
            window_jaccard(np.zeros((16, 12)), np.zeros((8, 12)))

    def test_matches_set_oracle_on_random_two_bar_clips(self):
        rng = np.random.default_rng(2024)
        p = BParams(window_steps=32, hop_steps=32)
        for _ in range(200):
            x = _folded(random_clip(rng, steps=32, density=rng.uniform(0.05, 0.6)))
            y = _folded(random_clip(rng, steps=32, density=rng.uniform(0.05, 0.6)))
            xs = set(zip(*np.nonzero(x.grid)))
            ys = set(zip(*np.nonzero(y.grid)))
            expected = len(xs & ys) / len(xs | ys) if xs | ys else 1.0
            self.assertAlmostEqual(weighted_window_s(x, y, p), expected, delta=1e-12)


class WeightedMeanTests(SimpleTestCase):
    def test_examples(self):
        self.assertAlmostEqual(float(weighted_mean([0.5, 1.0], 1)), 1.25 / 1.5, delta=1e-12)
        self.assertEqual(float(weighted_mean([1.0, 0.0], 1)), 1.0)
        self.assertEqual(float(weighted_mean([0.0, 0.0], 1)), 0.0)
        self.assertEqual(float(weighted_mean([1.0, 1.0, 1.0], 2)), 1.0)

    def test_identical_windows(self):
        clip = random_clip(np.random.default_rng(1))
        self.assertEqual(weighted_window_s(_folded(clip), _folded(clip)), 1.0)

    def test_higher_exponent_never_lowers_s(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            x, y = random_clip(rng, density=0.1), random_clip(rng, density=0.1)
            s = [shift_search_s(_folded(x), _folded(y), BParams(weight_exponent=e))[0] for e in (0.5, 1.0, 2.0)]
            self.assertLessEqual(s[0], s[1] + 1e-12)
            self.assertLessEqual(s[1], s[2] + 1e-12)


class ShiftSearchTests(SimpleTestCase):
    def setUp(self):
        self.x = random_clip(np.random.default_rng(42), density=0.25)

    def test_identity(self):
        self.assertEqual(shift_search_s(_folded(self.x), _folded(self.x)), (1.0, (0, 0)))

    def test_sixteen_step_time_shift_is_penalized(self):
        y = time_shift(self.x, 16)
        s, (dt, dp) = shift_search_s(_folded(self.x), _folded(y), BParams(lam=0.5))
        self.assertAlmostEqual(s, 0.96875, delta=1e-9)
        self.assertEqual((abs(dt), dp), (16, 0))
        self.assertTrue(np.array_equal(shift_folded(_folded(y).grid, dt, dp), _folded(self.x).grid))

    def test_penalty_falls_with_shift_distance(self):
        scores = []
        for delta in range(0, 129, 16):
            s, (dt, _) = shift_search_s(_folded(self.x), _folded(time_shift(self.x, delta)), BParams(lam=0.5))
            self.assertAlmostEqual(s, 1 - 0.5 * delta / 256, delta=1e-9)
            self.assertEqual(abs(dt), delta)
            scores.append(s)
        self.assertTrue(all(a > b for a, b in zip(scores, scores[1:])))

    def test_transposition_is_free(self):
        for k in range(1, 12):
            s, (dt, dp) = shift_search_s(_folded(self.x), _folded(transpose(self.x, k)))
            self.assertEqual(s, 1.0)
            self.assertEqual((dt, dp), (0, (12 - k) % 12))

    def test_transpose_up_three(self):
        self.assertEqual(shift_search_s(_folded(self.x), _folded(transpose(self.x, 3)))[1], (0, 9))

    def test_matches_exhaustive_search(self):
        rng = np.random.default_rng(77)
        p = BParams(window_steps=16, hop_steps=8, lam=0.5)
        for _ in range(5):
            x = _folded(random_clip(rng, steps=32, density=0.2))
            y = _folded(random_clip(rng, steps=32, density=0.2))
            best = 0.0
            for a, b in ((x, y), (y, x)):
                for dt, dp in itertools.product(range(32), range(12)):
                    moved = FoldedRoll(shift_folded(b.grid, dt, dp))
                    penalty = 1 - p.lam * min(dt, 32 - dt) / 32
                    best = max(best, weighted_window_s(a, moved, p) * penalty)
            self.assertAlmostEqual(shift_search_s(x, y, p)[0], best, delta=1e-12)

    def test_window_longer_than_clip(self):
        with self.assertRaises(LengthMismatch):
            shift_search_s(_folded(self.x), _folded(self.x), BParams(window_steps=512))


class SSIMuseBTests(SimpleTestCase):
    def test_self_identity(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            x = random_clip(rng, density=rng.uniform(0.02, 0.5)).as_binary()
            report = ssimuse_b(x, x)
            self.assertAlmostEqual(report.ssimuse_b, 1.0, delta=1e-9)
            self.assertEqual(report.best_shift, (0, 0))

    def test_symmetry(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            x, y = random_clip(rng, density=0.1), random_clip(rng, density=0.3)
            self.assertAlmostEqual(ssimuse_b(x, y).ssimuse_b, ssimuse_b(y, x).ssimuse_b, delta=1e-12)

    def test_score_is_l_times_s_within_bounds(self):
        rng = np.random.default_rng(7)
        x, y = random_clip(rng, density=0.1), random_clip(rng, density=0.3)
        report = ssimuse_b(x, y)
        self.assertAlmostEqual(report.ssimuse_b, report.l * report.s, delta=1e-15)
        self.assertTrue(0 <= report.ssimuse_b <= 1)
        self.assertEqual(len(report.per_window_s), 16)

    def test_one_silent_clip(self):
        silent = _clip(256, [], Flavor.BINARY)
        busy = random_clip(np.random.default_rng(8)).as_binary()
        report = ssimuse_b(silent, busy)
        self.assertEqual(report.s, 0.0)
        self.assertEqual(report.ssimuse_b, 0.0)
        self.assertLess(report.l, 1.0)

    def test_two_silent_clips(self):
        silent = _clip(256, [], Flavor.BINARY)
        report = ssimuse_b(silent, silent)
        self.assertEqual((report.l, report.s, report.ssimuse_b), (1.0, 1.0, 1.0))

    def test_length_mismatch(self):
        rng = np.random.default_rng(9)
        with self.assertRaises(LengthMismatch):
            ssimuse_b(random_clip(rng, steps=256), random_clip(rng, steps=128))

    def test_report_serializes(self):
        report = ssimuse_b(random_clip(np.random.default_rng(10)), random_clip(np.random.default_rng(11)))
        data = report.as_dict()
        self.assertEqual(data['best_shift'], list(report.best_shift))
        self.assertIn('ssimuse_b', report.to_json())

    def test_classic_mssim(self):
        rng = np.random.default_rng(12)
        x, y = random_clip(rng), random_clip(rng)
        self.assertAlmostEqual(classic_mssim(x, x), 1.0, delta=1e-9)
        self.assertLessEqual(classic_mssim(x, y), 1.0)
        self.assertLess(classic_mssim(x, transpose(x, 1)), 1.0)

    @override_settings(SSIMUSE_B_PARAMS={'window_steps': 32, 'hop_steps': 8, 'weight_exponent': 2.0,
                                         'lam': 0.25, 'c1': 1e-4})
    def test_params_from_settings(self):
        self.assertEqual(BParams.from_settings(lam=0.5), BParams(32, 8, 2.0, 0.5, 1e-4))

    def test_invalid_params(self):
        with self.assertRaises(ValueError):
            BParams(lam=1.5)
        with self.assertRaises(ValueError):
            BParams(window_steps=0)


class OnsetStatsTests(SimpleTestCase):
    def test_constant_velocity(self):
        clip = _clip(16, [(0, 60, 64), (3, 62, 64), (7, 40, 64)])
        mean, std = onset_stats(clip)
        self.assertAlmostEqual(mean, 64 / 127, delta=1e-12)
        self.assertEqual(std, 0.0)

    def test_two_onsets(self):
        mean, std = onset_stats(_clip(16, [(0, 60, 40), (4, 60, 80)]))
        self.assertAlmostEqual(mean, 60 / 127, delta=1e-12)
        self.assertAlmostEqual(std, 0.22271, places=5)

    def test_single_onset_has_zero_spread(self):
        self.assertEqual(onset_stats(_clip(16, [(0, 60, 100)]))[1], 0.0)

    def test_silence_is_ignored(self):
        sparse = _clip(256, [(0, 60, 100)])
        self.assertAlmostEqual(onset_stats(sparse)[0], 100 / 127, delta=1e-12)

    def test_silent_clip(self):
        with self.assertRaises(EmptyClip):
            onset_stats(_clip(16, []))

    def test_binary_roll_is_refused(self):
        with self.assertRaises(WrongFlavor):
            onset_stats(_clip(16, [(0, 60, 1)], Flavor.BINARY))


class DynamicsTests(SimpleTestCase):
    def test_dynamic_l(self):
        x = _clip(16, [(0, 60, 127)])
        self.assertEqual(dynamic_l(x, x), 1.0)
        self.assertAlmostEqual(luminance(0.5, 0.6, 1e-4), 0.6001 / 0.6101, delta=1e-12)
        self.assertAlmostEqual(luminance(0.5, 0.6, 1e-4), 0.98362, places=4)

    def test_velocity_offset_moves_l_only(self):
        x = _clip(16, [(0, 60, 10), (4, 60, 50), (8, 60, 90), (12, 60, 120)])
        y = _clip(16, [(0, 62, 20), (4, 62, 50), (8, 62, 100), (12, 62, 115)])
        louder = _clip(16, [(0, 62, 25), (4, 62, 55), (8, 62, 105), (12, 62, 120)])
        self.assertAlmostEqual(velocity_s(x, louder), velocity_s(x, y), delta=1e-12)
        self.assertLess(velocity_s(x, y), 1.0)
        self.assertLess(dynamic_l(x, louder), dynamic_l(x, y))

    def test_dynamic_c(self):
        self.assertAlmostEqual(contrast(0.1, 0.2, 9e-4), 0.80354, places=5)
        flat_a = _clip(16, [(0, 60, 50), (1, 60, 50)])
        flat_b = _clip(16, [(0, 60, 90), (2, 61, 90)])
        self.assertEqual(dynamic_c(flat_a, flat_b), 1.0)

    def test_extract_curve(self):
        curve = extract_curve(_clip(16, [(0, 60, 50), (0, 64, 90), (4, 30, 20)]))
        self.assertEqual(curve.step_index, (0, 4))
        self.assertEqual(curve.values, (90 / 127, 20 / 127))

    def test_dense_curve_covers_every_step(self):
        grid = np.zeros((256, 128), dtype=np.int16)
        grid[:, 60] = 70
        clip = Clip(PianoRoll(grid, flavor=Flavor.VELOCITY))
        self.assertEqual(len(extract_curve(clip)), 256)


def _brute_force_dtw(a, b):
    best = float('inf')

    def walk(i, j, cost):
        nonlocal best
        cost += abs(a[i] - b[j])
        if cost >= best:
            return
        if (i, j) == (len(a) - 1, len(b) - 1):
            best = cost
            return
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            if i + di < len(a) and j + dj < len(b):
                walk(i + di, j + dj, cost)

    walk(0, 0, 0.0)
    return best


class DTWTests(SimpleTestCase):
    def test_identical_sequences_follow_diagonal(self):
        alignment = dtw_align([.2, .4, .6], [.2, .4, .6])
        self.assertEqual(alignment.path, [(0, 0), (1, 1), (2, 2)])
        self.assertEqual(alignment.a, [.2, .4, .6])
        self.assertEqual(alignment.cost, 0.0)

    def test_repeated_value_is_stretched(self):
        alignment = dtw_align([.1, .2], [.1, .1, .2])
        self.assertEqual(alignment.a, [.1, .1, .2])
        self.assertEqual(alignment.b, [.1, .1, .2])
        self.assertAlmostEqual(alignment.cost, 0.0, delta=1e-15)

    def test_single_point(self):
        alignment = dtw_align([.5], [.1, .9])
        self.assertEqual(len(alignment.path), 2)
        self.assertEqual(alignment.a, [.5, .5])

    def test_empty_curve(self):
        with self.assertRaises(EmptyCurve):
            dtw_align([], [.1])

    def test_cost_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(99)
        for _ in range(500):
            a = rng.random(int(rng.integers(1, 7))).round(2).tolist()
            b = rng.random(int(rng.integers(1, 7))).round(2).tolist()
            alignment = dtw_align(a, b)
            self.assertAlmostEqual(alignment.cost, _brute_force_dtw(a, b), delta=1e-12)
            self.assertEqual(alignment.path[0], (0, 0))
            self.assertEqual(alignment.path[-1], (len(a) - 1, len(b) - 1))
            self.assertAlmostEqual(sum(abs(x - y) for x, y in zip(alignment.a, alignment.b)),
                                   alignment.cost, delta=1e-12)

    def test_path_length_bounds(self):
        rng = np.random.default_rng(98)
        for _ in range(300):
            n, m = (int(k) for k in rng.integers(1, 40, size=2))
            alignment = dtw_align(rng.random(n).tolist(), rng.random(m).tolist())
            self.assertEqual(len(alignment.a), len(alignment.path))
            self.assertEqual(len(alignment.b), len(alignment.path))
            self.assertGreaterEqual(len(alignment.path), max(n, m))
            self.assertLessEqual(len(alignment.path), n + m - 1)
            steps = {(i2 - i1, j2 - j1) for (i1, j1), (i2, j2) in zip(alignment.path, alignment.path[1:])}
            self.assertLessEqual(steps, {(1, 0), (0, 1), (1, 1)})


class StructureTests(SimpleTestCase):
    def test_anti_correlated(self):
        s = structure([.1, .2, .3], [.3, .2, .1], 4.5e-4)
        self.assertAlmostEqual(s, (-0.01 + 4.5e-4) / (0.01 + 4.5e-4), delta=1e-9)
        self.assertAlmostEqual(s, -0.9139, places=4)

    def test_constant_curves(self):
        self.assertEqual(structure([.5, .5, .5], [.2, .2, .2], 4.5e-4), 1.0)

    def test_velocity_s_identity(self):
        clip = random_clip(np.random.default_rng(4))
        self.assertAlmostEqual(velocity_s(clip, clip), 1.0, delta=1e-9)


class SSIMuseVTests(SimpleTestCase):
    def test_self_identity(self):
        rng = np.random.default_rng(15)
        for _ in range(50):
            x = random_clip(rng, density=rng.uniform(0.05, 0.5))
            self.assertAlmostEqual(ssimuse_v(x, x).ssimuse_v, 1.0, delta=1e-9)

    def test_symmetry(self):
        rng = np.random.default_rng(16)
        for _ in range(10):
            x, y = random_clip(rng), random_clip(rng)
            self.assertAlmostEqual(ssimuse_v(x, y).ssimuse_v, ssimuse_v(y, x).ssimuse_v, delta=1e-12)

    def test_flattened_dynamics(self):
        x = random_clip(np.random.default_rng(17), dynamics=(60, 20))
        flat = Clip(PianoRoll(np.where(x.roll.grid > 0, 110, 0), flavor=Flavor.VELOCITY))
        report = ssimuse_v(x, flat)
        self.assertLess(report.l, 1.0)
        self.assertLess(report.c, 1.0)
        self.assertEqual(report.s, 1.0)
        self.assertTrue(report.degenerate)

    def test_constant_curve_is_degenerate(self):
        flat = _clip(16, [(step, 60, 110) for step in range(0, 16, 2)])
        ramp = _clip(16, [(0, 60, 20), (5, 60, 60), (10, 60, 100)])
        self.assertEqual(onset_stats(flat)[1], 0.0)
        for x, y in ((flat, ramp), (ramp, flat)):
            report = ssimuse_v(x, y)
            self.assertEqual(report.s, 1.0)
            self.assertTrue(report.degenerate)
            self.assertEqual(report.c, contrast(0.0, onset_stats(ramp)[1], 9e-4))

    def test_score_may_be_negative(self):
        x = _clip(16, [(0, 60, 20), (1, 60, 60), (2, 60, 100)])
        y = _clip(16, [(0, 60, 100), (1, 60, 60), (2, 60, 20)])
        self.assertLess(ssimuse_v(x, y).s, 0)

    def test_silent_clip(self):
        with self.assertRaises(EmptyClip):
            ssimuse_v(_clip(16, []), _clip(16, [(0, 60, 100)]))

    def test_binary_input(self):
        clip = random_clip(np.random.default_rng(18))
        with self.assertRaises(WrongFlavor):
            ssimuse_v(clip.as_binary(), clip)

    def test_c3_is_half_c2(self):
        self.assertEqual(VParams(c2=8e-4).c3, 4e-4)


class ParamsFormTests(SimpleTestCase):
    def test_blank_form_uses_settings(self):
        form = ParamsForm(data={})
        self.assertTrue(form.is_valid())
        self.assertEqual(form.b_params(), BParams.from_settings())
        self.assertEqual(form.v_params(), VParams.from_settings())

    def test_overrides(self):
        form = ParamsForm(data={'window_steps': 32, 'lam': '0.25', 'v_c2': 1e-3})
        self.assertTrue(form.is_valid())
        self.assertEqual(form.b_params().window_steps, 32)
        self.assertEqual(form.b_params().lam, 0.25)
        self.assertEqual(form.v_params().c2, 1e-3)

    def test_rejects_bad_values(self):
        form = ParamsForm(data={'lam': 2, 'c1': 0, 'v_c1': -1})
        self.assertFalse(form.is_valid())
        self.assertEqual(set(form.errors), {'lam', 'c1', 'v_c1'})
