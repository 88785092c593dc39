"""Load a directory of MIDI files into velocity clips."""
import logging
from dataclasses import dataclass, field
from pathlib import Path

from django.conf import settings

from SSIMuse.exceptions import SSIMuseError

from .midi import filter_meter, parse_midi_file
from .pianoroll import Flavor, build_roll, pad_to_clip, segment_clips

logger = logging.getLogger('ssimuse')

MIDI_SUFFIXES = ('.mid', '.midi', '.smf')


@dataclass
class Piece:
    path: Path
    clips: list

    @property
    def name(self):
        return self.path.name


@dataclass
class CorpusLoad:
    pieces: list = field(default_factory=list)
    rejected: list = field(default_factory=list)
    failed: list = field(default_factory=list)

    @property
    def clips(self):
        return [clip for piece in self.pieces for clip in piece.clips]


def midi_files(directory):
    directory = Path(directory)
    return sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in MIDI_SUFFIXES)


def load_piece(path, track_filter=None, steps_per_quarter=None, clip_steps=None, pad_short=False):
    """Parse, meter-filter and clip one file.

    Returns None when the file is Rejected for its meter; parse errors propagate.
    """
    clip_steps = clip_steps or settings.SSIMUSE_CLIP_STEPS
    ts = filter_meter(parse_midi_file(path, track_filter=track_filter, steps_per_quarter=steps_per_quarter))
    if ts is None:
        return None
    roll = build_roll(ts, Flavor.VELOCITY)
    clips = segment_clips(roll, clip_steps, source_id=Path(path).name)
    if not clips and pad_short:
        clips = [pad_to_clip(roll, clip_steps, source_id=Path(path).name)]
    return Piece(Path(path), clips)


def load_corpus(directory, track_filter=None, steps_per_quarter=None, clip_steps=None, pad_short=False):
    """Every readable 4/4 MIDI file in directory (sorted by name), skipping the rest."""
    result = CorpusLoad()
    for path in midi_files(directory):
        try:
            piece = load_piece(path, track_filter, steps_per_quarter, clip_steps, pad_short)
        except (SSIMuseError, OSError) as exc:
            logger.warning(f"Skipping {path.name}: {exc}")
            result.failed.append((path, str(exc)))
            continue
        if piece is None:
            result.rejected.append(path)
            continue
        result.pieces.append(piece)
    logger.info(
        f"Loaded corpus {directory}: {len(result.pieces)} pieces, {len(result.clips)} clips, "
        f"{len(result.rejected)} rejected, {len(result.failed)} unreadable"
    )
    return result
