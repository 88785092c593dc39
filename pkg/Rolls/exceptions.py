from SSIMuse.exceptions import SSIMuseError


class MalformedFile(SSIMuseError):
    """Bad SMF header or chunk structure."""


class UnsupportedFormat(MalformedFile):
    """SMF format 2 (independent sequences) is not read."""


class UnsupportedDivision(SSIMuseError):
    """SMPTE timecode division instead of ticks per quarter note."""


class EmptySelection(SSIMuseError):
    """The track filter matched no note onsets."""


class EmptyInput(SSIMuseError):
    pass


class WrongFlavor(SSIMuseError):
    pass


class BadClipLength(SSIMuseError):
    pass


class OutOfRange(SSIMuseError):
    pass
