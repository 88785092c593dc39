"""Synthetic MIDI files and clips for tests and desk experiments."""
import io

import mido
import numpy as np

from .pianoroll import PITCHES, Clip, Flavor, PianoRoll


def midi_bytes(tracks, ticks_per_beat=480, midi_type=1, time_signature=(4, 4)):
    """Serialize tracks to SMF bytes.

    tracks: list of (name, notes) where notes are (tick, pitch, velocity, duration)
    tuples. A time_signature of None writes no signature event at all.
    """
    midi = mido.MidiFile(type=midi_type, ticks_per_beat=ticks_per_beat)
    for index, (name, notes) in enumerate(tracks):
        track = mido.MidiTrack()
        if name:
            track.append(mido.MetaMessage('track_name', name=name, time=0))
        if index == 0 and time_signature is not None:
            num, den = time_signature
            track.append(mido.MetaMessage('time_signature', numerator=num, denominator=den, time=0))
        timeline = []
        for tick, pitch, velocity, duration in notes:
            timeline.append((tick, 1, mido.Message('note_on', note=pitch, velocity=velocity)))
            timeline.append((tick + duration, 0, mido.Message('note_off', note=pitch, velocity=0)))
        timeline.sort(key=lambda item: (item[0], item[1]))
        now = 0
        for tick, _, msg in timeline:
            track.append(msg.copy(time=tick - now))
            now = tick
        midi.tracks.append(track)
    buffer = io.BytesIO()
    midi.save(file=buffer)
    return buffer.getvalue()


def clip_to_midi_bytes(clip, ticks_per_beat=480, steps_per_quarter=4):
    """One-track SMF reproducing the clip's onsets (sixteenth-note durations)."""
    ticks_per_step = ticks_per_beat // steps_per_quarter
    steps, pitches = np.nonzero(clip.roll.grid)
    notes = []
    for step, pitch in zip(steps.tolist(), pitches.tolist()):
        velocity = int(clip.roll.grid[step, pitch])
        velocity = 100 if clip.roll.flavor == Flavor.BINARY else velocity
        notes.append((step * ticks_per_step, pitch, velocity, ticks_per_step))
    return midi_bytes([('piano', notes)], ticks_per_beat=ticks_per_beat)


def random_clip(rng, steps=256, density=0.3, max_chord=3, low=36, high=96, source_id='', dynamics=None):
    """Velocity clip with random onsets; dynamics is (mean, spread) of velocity."""
    mean, spread = dynamics or (rng.integers(50, 100), rng.integers(5, 25))
    grid = np.zeros((steps, PITCHES), dtype=np.int16)
    for step in np.flatnonzero(rng.random(steps) < density):
        for pitch in rng.choice(np.arange(low, high), size=rng.integers(1, max_chord + 1), replace=False):
            grid[step, pitch] = int(np.clip(rng.normal(mean, spread), 1, 127))
    return Clip(PianoRoll(grid, flavor=Flavor.VELOCITY), source_id=source_id)


MAJOR_SCALE = (0, 2, 4, 5, 7, 9, 11)

# scale degrees, one chord per bar
PROGRESSIONS = (
    (0, 4, 5, 3),
    (0, 5, 3, 4),
    (5, 3, 0, 4),
    (3, 4, 0, 5),
    (0, 3, 4, 4),
)

# onset probability per sixteenth of a bar: downbeat always, eighths often
BAR_RHYTHM = np.array([1.0, .1, .8, .1, .9, .1, .8, .1, .9, .1, .8, .1, .9, .1, .8, .1])


def _triad(root, degree):
    return [root + MAJOR_SCALE[(degree + k) % 7] + 12 * ((degree + k) // 7) for k in (0, 2, 4)]


def phrase_clip(rng, steps=256, phrase_bars=None, source_id='', dynamics=None, drop=0.1):
    """Velocity clip of a repeated chord progression in a random major key.

    The piece keeps one bar rhythm throughout; each bar strikes its chord on that
    rhythm with a root bass on the downbeat, and the 2- or 4-bar phrase repeats
    to the end of the clip with a fraction `drop` of the onsets left out.
    """
    mean, spread = dynamics or (rng.integers(50, 100), rng.integers(5, 25))
    steps_per_bar = len(BAR_RHYTHM)
    root = 60 + int(rng.integers(12))
    progression = PROGRESSIONS[int(rng.integers(len(PROGRESSIONS)))]
    phrase_bars = phrase_bars or int(rng.choice((2, 4)))
    rhythm = np.flatnonzero(rng.random(steps_per_bar) < BAR_RHYTHM)

    grid = np.zeros((steps, PITCHES), dtype=np.int16)
    for bar in range(steps // steps_per_bar):
        degree = progression[bar % phrase_bars]
        chord = _triad(root, degree)
        for offset in rhythm:
            if rng.random() < drop:
                continue
            step = bar * steps_per_bar + int(offset)
            pitches = chord + [root - 24 + MAJOR_SCALE[degree]] if offset == 0 else chord
            for pitch in pitches:
                grid[step, pitch] = int(np.clip(rng.normal(mean, spread), 1, 127))
    return Clip(PianoRoll(grid, flavor=Flavor.VELOCITY), source_id=source_id)


def random_corpus(n_pieces, seed=0, clips_per_piece=1, factory=random_clip, **kwargs):
    rng = np.random.default_rng(seed)
    clips = []
    for piece in range(n_pieces):
        for index in range(clips_per_piece):
            clip = factory(rng, source_id=f'piece{piece:03d}.mid', **kwargs)
            clips.append(Clip(clip.roll, source_id=clip.source_id, start_step=index * clip.steps))
    return clips


def transpose(clip, semitones):
    """Pitch-shift every onset; notes pushed outside [0, 127] are lost."""
    grid = np.zeros_like(clip.roll.grid)
    if semitones >= 0:
        grid[:, semitones:] = clip.roll.grid[:, :PITCHES - semitones]
    else:
        grid[:, :semitones] = clip.roll.grid[:, -semitones:]
    roll = PianoRoll(grid, flavor=clip.roll.flavor, steps_per_bar=clip.roll.steps_per_bar)
    return Clip(roll, source_id=clip.source_id, start_step=clip.start_step)


def time_shift(clip, steps):
    """Cyclic shift along time: onset at step i moves to (i + steps) mod T."""
    grid = np.roll(clip.roll.grid, steps, axis=0)
    roll = PianoRoll(grid, flavor=clip.roll.flavor, steps_per_bar=clip.roll.steps_per_bar)
    return Clip(roll, source_id=clip.source_id, start_step=clip.start_step)
