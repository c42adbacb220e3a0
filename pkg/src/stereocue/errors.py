"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid parameters, sizes or modes."""


class StreamOrderError(RuntimeError):
    """A frame arrived out of order for a stateful stream."""


class WavFormatError(ValueError):
    """Unsupported WAV layout (channel count, sample rate, sample format)."""
