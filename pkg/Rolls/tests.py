import os
import tempfile
from pathlib import Path

import mido
import numpy as np
from django.test import SimpleTestCase
from PIL import Image

from .corpus import load_corpus, load_piece
from .exceptions import (
    BadClipLength, EmptyInput, EmptySelection, MalformedFile, OutOfRange, UnsupportedDivision,
    UnsupportedFormat, WrongFlavor,
)
from .factories import clip_to_midi_bytes, midi_bytes, phrase_clip, random_clip, random_corpus, transpose
from .midi import NoteEvent, QuantizedTrackSet, filter_meter, parse_midi, parse_track_filter, quantize
from .pianoroll import (
    Clip, Flavor, PianoRoll, build_roll, dump_csv, dump_image, fold_pitch_classes, pad_to_clip,
    paste_segment, segment_clips, to_binary,
)


def _roll(steps, cells, flavor=Flavor.BINARY):
    grid = np.zeros((steps, 128), dtype=np.int16)
    for step, pitch, value in cells:
        grid[step, pitch] = value
    return PianoRoll(grid, flavor=flavor)


class ParseMidiTests(SimpleTestCase):
    def test_quarter_note_lands_on_step_four(self):
        ts = parse_midi(midi_bytes([('piano', [(480, 60, 80, 240)])]))
        self.assertEqual(ts.events, (NoteEvent(step=4, pitch=60, velocity=80),))

    def test_note_off_and_zero_velocity_note_on_produce_no_event(self):
        track = mido.MidiTrack([
            mido.Message('note_on', note=60, velocity=90, time=0),
            mido.Message('note_on', note=60, velocity=0, time=120),
            mido.Message('note_on', note=62, velocity=70, time=0),
            mido.Message('note_off', note=62, velocity=64, time=120),
        ])
        midi = mido.MidiFile(type=0, ticks_per_beat=480)
        midi.tracks.append(track)
        path = Path(tempfile.mkdtemp()) / 'offs.mid'
        midi.save(str(path))
        ts = parse_midi(path.read_bytes())
        self.assertEqual(ts.events, (NoteEvent(0, 60, 90), NoteEvent(1, 62, 70)))

    def test_track_filter_by_index_and_name(self):
        data = midi_bytes([
            ('piano', [(0, 60, 80, 120)]),
            ('bass', [(0, 36, 100, 120)]),
        ])
        self.assertEqual([e.pitch for e in parse_midi(data, parse_track_filter('1')).events], [36])
        self.assertEqual([e.pitch for e in parse_midi(data, parse_track_filter('pia*')).events], [60])
        self.assertEqual(len(parse_midi(data).events), 2)

    def test_filter_matching_no_notes(self):
        data = midi_bytes([('piano', [(0, 60, 80, 120)])])
        with self.assertRaises(EmptySelection):
            parse_midi(data, parse_track_filter('drums'))

    def test_colliding_onsets_keep_loudest(self):
        data = midi_bytes([
            ('a', [(0, 60, 80, 60)]),
            ('b', [(10, 60, 90, 60)]),
        ])
        self.assertEqual(parse_midi(data).events, (NoteEvent(0, 60, 90),))

    def test_quantization_rounds_half_up(self):
        self.assertEqual(quantize(60, 4, 480), 1)
        self.assertEqual(quantize(59, 4, 480), 0)
        self.assertEqual(quantize(180, 4, 480), 2)

    def test_grid_ticks_survive_quantization(self):
        for tpqn in (96, 120, 384, 480, 960):
            for spq in (1, 2, 4, 8):
                if tpqn % spq:
                    continue
                for step in (0, 1, 3, 15, 16, 255, 4095):
                    tick = step * tpqn // spq
                    self.assertEqual(quantize(tick, spq, tpqn), step)
                    self.assertEqual(quantize(tick, spq, tpqn) * tpqn // spq, tick)

    def test_rejects_bad_input(self):
        with self.assertRaises(MalformedFile):
            parse_midi(b'not a midi file at all')
        with self.assertRaises(MalformedFile):
            parse_midi(midi_bytes([('piano', [(0, 60, 80, 120)])])[:30])

    def test_format_two_is_unsupported(self):
        data = bytearray(midi_bytes([('piano', [(0, 60, 80, 120)])], midi_type=1))
        data[8:10] = (2).to_bytes(2, 'big')
        with self.assertRaises(UnsupportedFormat):
            parse_midi(bytes(data))

    def test_smpte_division_is_unsupported(self):
        data = bytearray(midi_bytes([('piano', [(0, 60, 80, 120)])]))
        data[12:14] = bytes([0xE7, 0x28])
        with self.assertRaises(UnsupportedDivision):
            parse_midi(bytes(data))

    def test_identical_bytes_parse_identically(self):
        data = clip_to_midi_bytes(random_clip(np.random.default_rng(3)))
        self.assertEqual(parse_midi(data), parse_midi(data))


class MeterTests(SimpleTestCase):
    def test_four_four_passes(self):
        ts = parse_midi(midi_bytes([('piano', [(0, 60, 80, 120)])]))
        self.assertIs(filter_meter(ts), ts)

    def test_three_four_is_rejected(self):
        ts = parse_midi(midi_bytes([('piano', [(0, 60, 80, 120)])], time_signature=(3, 4)))
        self.assertIsNone(filter_meter(ts))

    def test_missing_signature_assumes_four_four(self):
        ts = parse_midi(midi_bytes([('piano', [(0, 60, 80, 120)])], time_signature=None))
        self.assertIs(filter_meter(ts), ts)


class PianoRollTests(SimpleTestCase):
    def test_build_binary_and_velocity(self):
        ts = QuantizedTrackSet(events=(NoteEvent(0, 60, 80),), total_steps=1)
        binary = build_roll(ts, Flavor.BINARY)
        velocity = build_roll(ts, Flavor.VELOCITY)
        self.assertEqual(binary.steps, 16)
        self.assertEqual(int(binary.grid.sum()), 1)
        self.assertEqual(binary.grid[0, 60], 1)
        self.assertEqual(velocity.grid[0, 60], 80)

    def test_build_roll_without_events(self):
        with self.assertRaises(EmptyInput):
            build_roll(QuantizedTrackSet(events=(), total_steps=16))

    def test_collision_from_midi_keeps_max(self):
        data = midi_bytes([('a', [(0, 60, 80, 60)]), ('b', [(0, 60, 90, 60)])])
        roll = build_roll(parse_midi(data), Flavor.VELOCITY)
        self.assertEqual(roll.grid[0, 60], 90)
        self.assertEqual(np.count_nonzero(roll.grid), 1)

    def test_fold_octaves(self):
        folded = fold_pitch_classes(_roll(16, [(0, 60, 1), (0, 72, 1)]))
        self.assertEqual(folded.grid[0, 0], 2)
        self.assertEqual(int(folded.grid.sum()), 2)

        folded = fold_pitch_classes(_roll(16, [(3, 48, 1), (3, 50, 1), (3, 55, 1)]))
        self.assertEqual(np.flatnonzero(folded.grid[3]).tolist(), [0, 2, 7])
        self.assertTrue((folded.grid[3][[0, 2, 7]] == 1).all())

    def test_fold_empty_and_velocity(self):
        self.assertFalse(fold_pitch_classes(_roll(32, [])).grid.any())
        self.assertEqual(fold_pitch_classes(_roll(32, [])).grid.shape, (32, 12))
        with self.assertRaises(WrongFlavor):
            fold_pitch_classes(_roll(16, [(0, 60, 80)], Flavor.VELOCITY))

    def test_fold_sums_to_onset_count(self):
        clip = random_clip(np.random.default_rng(11))
        binary = to_binary(clip.roll)
        self.assertEqual(int(fold_pitch_classes(binary).grid.sum()), int(binary.grid.sum()))

    def test_segment_clips(self):
        self.assertEqual([c.start_step for c in segment_clips(_roll(512, []))], [0, 256])
        self.assertEqual(len(segment_clips(_roll(304, []))), 1)
        self.assertEqual(segment_clips(_roll(240, [])), [])
        with self.assertRaises(BadClipLength):
            segment_clips(_roll(512, []), clip_steps=100)

    def test_pad_to_clip(self):
        clip = pad_to_clip(_roll(32, [(5, 60, 1)]), source_id='short.mid')
        self.assertEqual(clip.steps, 256)
        self.assertEqual(clip.roll.grid[5, 60], 1)
        self.assertEqual(clip.origin, ('short.mid', 0))

    def test_paste_full_clip_equals_source(self):
        rng = np.random.default_rng(5)
        src, dst = random_clip(rng), random_clip(rng)
        self.assertEqual(paste_segment(dst, src, 0, 0, 16).roll, src.roll)

    def test_paste_one_bar_changes_one_bar(self):
        rng = np.random.default_rng(6)
        src, dst = random_clip(rng, density=0.5), random_clip(rng, density=0.5)
        out = paste_segment(dst, src, 2, 9, 1)
        changed = np.flatnonzero((out.roll.grid != dst.roll.grid).any(axis=1))
        self.assertTrue(changed.size > 0)
        self.assertTrue(((changed >= 144) & (changed < 160)).all())
        self.assertTrue(np.array_equal(out.roll.grid[144:160], src.roll.grid[32:48]))
        self.assertEqual(out.origin, dst.origin)

    def test_paste_silent_bar_silences_destination(self):
        dst = random_clip(np.random.default_rng(7), density=0.9)
        silent = Clip(PianoRoll(np.zeros((256, 128), dtype=np.int16), flavor=Flavor.VELOCITY))
        out = paste_segment(dst, silent, 0, 3, 1)
        self.assertFalse(out.roll.grid[48:64].any())

    def test_paste_out_of_range(self):
        rng = np.random.default_rng(8)
        src, dst = random_clip(rng), random_clip(rng)
        with self.assertRaises(OutOfRange):
            paste_segment(dst, src, 10, 0, 8)
        with self.assertRaises(OutOfRange):
            paste_segment(dst, src, 0, 0, 0)
        with self.assertRaises(WrongFlavor):
            paste_segment(dst, src.as_binary(), 0, 0, 1)

    def test_grid_is_read_only(self):
        clip = random_clip(np.random.default_rng(9))
        with self.assertRaises(ValueError):
            clip.roll.grid[0, 0] = 1

    def test_transpose_moves_pitches(self):
        clip = Clip(_roll(256, [(0, 60, 1)]))
        self.assertEqual(transpose(clip, 3).roll.grid[0, 63], 1)

    def test_phrase_clip_repeats_its_phrase(self):
        rng = np.random.default_rng(10)
        for phrase_bars in (2, 4):
            grid = to_binary(phrase_clip(rng, phrase_bars=phrase_bars, drop=0.0).roll).grid
            bars = grid.reshape(16, 16, 128)
            for bar in range(16 - phrase_bars):
                self.assertTrue(np.array_equal(bars[bar], bars[bar + phrase_bars]))
            self.assertFalse(np.array_equal(bars[0], bars[1]))
            self.assertTrue(bars[:, 0].any(axis=1).all())

    def test_corpus_factory_is_pluggable(self):
        clips = random_corpus(3, seed=4, factory=phrase_clip, steps=128)
        self.assertEqual([c.source_id for c in clips], ['piece000.mid', 'piece001.mid', 'piece002.mid'])
        self.assertTrue(all(c.steps == 128 for c in clips))
        again = random_corpus(3, seed=4, factory=phrase_clip, steps=128)
        self.assertTrue(all(np.array_equal(a.roll.grid, b.roll.grid) for a, b in zip(clips, again)))

    def test_dumps(self):
        out = tempfile.mkdtemp()
        roll = _roll(16, [(0, 127, 100), (2, 0, 50)], Flavor.VELOCITY)
        dump_image(roll, os.path.join(out, 'roll.png'))
        dump_csv(roll, os.path.join(out, 'roll.csv'))
        with Image.open(os.path.join(out, 'roll.png')) as image:
            self.assertEqual(image.size, (16, 128))
            self.assertEqual(image.getpixel((0, 0)), 201)
            self.assertEqual(image.getpixel((2, 127)), 100)
        with open(os.path.join(out, 'roll.csv')) as f:
            self.assertEqual(f.read().split(), ['step,pitch,value', '0,127,100', '2,0,50'])


class CorpusTests(SimpleTestCase):
    def setUp(self):
        self.dir = tempfile.mkdtemp()

    def write(self, name, data):
        path = os.path.join(self.dir, name)
        with open(path, 'wb') as f:
            f.write(data)
        return path

    def test_load_corpus_skips_rejected_and_broken_files(self):
        rng = np.random.default_rng(1)
        self.write('b.mid', clip_to_midi_bytes(random_clip(rng)))
        self.write('a.mid', clip_to_midi_bytes(random_clip(rng)))
        self.write('waltz.mid', midi_bytes([('piano', [(0, 60, 80, 120)])], time_signature=(3, 4)))
        self.write('broken.mid', b'MThd garbage')
        self.write('notes.txt', b'ignored')

        corpus = load_corpus(self.dir)
        self.assertEqual([p.name for p in corpus.pieces], ['a.mid', 'b.mid'])
        self.assertEqual([p.name for p in corpus.rejected], ['waltz.mid'])
        self.assertEqual(len(corpus.failed), 1)
        self.assertEqual(len(corpus.clips), 2)
        self.assertTrue(all(clip.roll.flavor == Flavor.VELOCITY for clip in corpus.clips))

    def test_round_trip_through_midi_keeps_onsets(self):
        clip = random_clip(np.random.default_rng(2))
        piece = load_piece(self.write('clip.mid', clip_to_midi_bytes(clip)))
        self.assertEqual(len(piece.clips), 1)
        self.assertTrue(np.array_equal(piece.clips[0].roll.grid, clip.roll.grid))

    def test_short_piece_padded_on_request(self):
        path = self.write('short.mid', midi_bytes([('piano', [(0, 60, 80, 120)])]))
        self.assertEqual(load_piece(path).clips, [])
        self.assertEqual(load_piece(path, pad_short=True).clips[0].steps, 256)
