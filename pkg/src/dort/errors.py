"""Exception hierarchy for DorT.

Every error raised on purpose by the package derives from :class:`DortError`.
Errors that describe a bad argument also derive from :class:`ValueError` so
callers that only know the builtin still catch them.
"""

from __future__ import annotations


class DortError(Exception):
    """Base class for all DorT errors."""


class ShapeMismatch(DortError, ValueError):
    """Tensor shapes or channel counts are incompatible for an operation."""


class EmptyAfterClip(DortError, ValueError):
    """A rectangle has no overlap with the clipping bounds."""


class ImageTooSmall(DortError, ValueError):
    """A frame is smaller than the feature extractor's receptive field."""


class EmptySearchRegion(DortError):
    """A tracked box's search window lies outside the feature map."""

    def __init__(self, message: str, box_index: int | None = None):
        super().__init__(message)
        self.box_index = box_index


class DegenerateDataset(DortError, ValueError):
    """Training data is empty or contains a single class."""


class EmptySequence(DortError, ValueError):
    """A sequence with no frames was passed to the pipeline."""


class MissingGroundtruth(DortError):
    """Ground truth is required (oracle decisions) but was not supplied."""


class ParseError(DortError, ValueError):
    """A text file could not be parsed.

    Attributes:
        line: 1-based line number of the offending row, when known.
        path: File being parsed, when known.
    """

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        location = ""
        if path is not None:
            location += f"{path}"
        if line is not None:
            location += f"{':' if location else 'line '}{line}"
        super().__init__(f"{location}: {message}" if location else message)
        self.line = line
        self.path = path


class MissingFrame(DortError, FileNotFoundError):
    """A frame file or frame directory expected on disk is absent."""


class SpecOverflow(DortError, ValueError):
    """A scene specification places an object that cannot fit the frame."""


class MissingIds(DortError, ValueError):
    """Boxes without object IDs were passed to a tracklet computation."""


class LengthMismatch(DortError, ValueError):
    """Two sequences that must be aligned have different lengths."""


class CheckpointError(DortError):
    """A scheduler checkpoint is corrupt or does not match its sidecar."""


__all__ = [
    "DortError",
    "ShapeMismatch",
    "EmptyAfterClip",
    "ImageTooSmall",
    "EmptySearchRegion",
    "DegenerateDataset",
    "EmptySequence",
    "MissingGroundtruth",
    "ParseError",
    "MissingFrame",
    "SpecOverflow",
    "MissingIds",
    "LengthMismatch",
    "CheckpointError",
]
