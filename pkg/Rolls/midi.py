"""Standard MIDI File ingestion: onsets quantized to the piano-roll grid."""
import fnmatch
import io
import logging
from dataclasses import dataclass, field

import mido
from django.conf import settings

from .exceptions import EmptySelection, MalformedFile, UnsupportedDivision, UnsupportedFormat

logger = logging.getLogger('ssimuse')


@dataclass(frozen=True, order=True)
class NoteEvent:
    step: int
    pitch: int
    velocity: int

    def __post_init__(self):
        if self.step < 0:
            raise ValueError(f"step must be >= 0, got {self.step}")
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch must be in [0, 127], got {self.pitch}")
        if not 1 <= self.velocity <= 127:
            raise ValueError(f"velocity must be in [1, 127], got {self.velocity}")


@dataclass(frozen=True)
class QuantizedTrackSet:
    events: tuple
    total_steps: int
    steps_per_quarter: int = 4
    source_id: str = ''
    meter_ok: bool = True
    time_signatures: tuple = field(default=(), compare=False)

    @property
    def steps_per_bar(self):
        return 4 * self.steps_per_quarter


def quantize(tick, steps_per_quarter, ticks_per_quarter):
    """Nearest grid step, halves rounded up: round(tick * spq / tpqn)."""
    return (2 * tick * steps_per_quarter + ticks_per_quarter) // (2 * ticks_per_quarter)


def parse_track_filter(text):
    """'0,2,piano*' -> frozenset({0, 2, 'piano*'}); empty text means no filter."""
    if not text:
        return None
    items = set()
    for part in text.split(','):
        part = part.strip()
        if not part:
            continue
        items.add(int(part) if part.isdigit() else part)
    return frozenset(items) or None


def _track_selected(index, track, track_filter):
    if track_filter is None:
        return True
    if index in track_filter:
        return True
    name = track.name or ''
    return any(isinstance(p, str) and fnmatch.fnmatchcase(name, p) for p in track_filter)


def _load(data):
    try:
        return mido.MidiFile(file=io.BytesIO(data))
    except (OSError, EOFError, ValueError, KeyError, IndexError, TypeError) as exc:
        raise MalformedFile(f"Unreadable Standard MIDI File: {exc}") from exc


def parse_midi(data, track_filter=None, steps_per_quarter=None, source_id=''):
    """Parse raw SMF bytes into a QuantizedTrackSet of note onsets.

    Note-offs and velocity-0 note-ons are dropped; onsets landing on the
    same (step, pitch) after quantization keep the loudest velocity.
    Time signatures are read from every track, selected or not.
    """
    steps_per_quarter = steps_per_quarter or settings.SSIMUSE_STEPS_PER_QUARTER
    midi = _load(data)

    if midi.ticks_per_beat < 0:
        raise UnsupportedDivision(f"{source_id or 'input'} uses SMPTE timecode division")
    if midi.ticks_per_beat == 0:
        raise MalformedFile(f"{source_id or 'input'} has a zero ticks-per-quarter division")
    if midi.type == 2:
        raise UnsupportedFormat(f"{source_id or 'input'} is SMF format 2")
    if midi.type not in (0, 1):
        raise MalformedFile(f"{source_id or 'input'} declares unknown SMF format {midi.type}")

    tpqn = midi.ticks_per_beat
    velocities = {}
    signatures = []
    end_tick = 0
    selected_any = False

    for index, track in enumerate(midi.tracks):
        selected = _track_selected(index, track, track_filter)
        selected_any = selected_any or selected
        tick = 0
        for msg in track:
            tick += msg.time
            if msg.type == 'time_signature':
                signatures.append((msg.numerator, msg.denominator))
            elif selected and msg.type == 'note_on' and msg.velocity > 0:
                key = (quantize(tick, steps_per_quarter, tpqn), msg.note)
                velocities[key] = max(velocities.get(key, 0), msg.velocity)
        end_tick = max(end_tick, tick)

    if track_filter is not None and not velocities:
        raise EmptySelection(
            f"Track filter {sorted(map(str, track_filter))} matched no notes in {source_id or 'input'}"
        )

    events = tuple(NoteEvent(step, pitch, vel) for (step, pitch), vel in sorted(velocities.items()))
    total_steps = quantize(end_tick, steps_per_quarter, tpqn)
    if events:
        total_steps = max(total_steps, events[-1].step + 1)

    meter_ok = all(sig == (4, 4) for sig in signatures)
    logger.debug(f"Parsed {source_id or 'input'}: {len(events)} onsets, {total_steps} steps, meter_ok={meter_ok}")

    return QuantizedTrackSet(
        events=events,
        total_steps=max(total_steps, 1),
        steps_per_quarter=steps_per_quarter,
        source_id=source_id,
        meter_ok=meter_ok,
        time_signatures=tuple(signatures),
    )


def parse_midi_file(path, track_filter=None, steps_per_quarter=None):
    with open(path, 'rb') as handle:
        data = handle.read()
    return parse_midi(data, track_filter=track_filter, steps_per_quarter=steps_per_quarter,
                      source_id=str(path))


def filter_meter(ts):
    """Return ts if it is 4/4 throughout (or carries no signature), else None."""
    if ts.meter_ok:
        return ts
    logger.info(f"Rejected {ts.source_id or 'input'}: non-4/4 time signature {ts.time_signatures}")
    return None
