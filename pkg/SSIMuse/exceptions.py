class SSIMuseError(Exception):
    """Base class for every domain error raised by the SSIMuse apps."""
