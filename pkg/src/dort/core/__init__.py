"""Feature maps, the correlation tracker and ID association.

The decision loop lives in :mod:`dort.core.pipeline` and is imported from
there directly; it depends on the scheduler package, which depends on this
one.
"""

from .association import Assignment, IdCounter, associate, hungarian
from .featmap import FeatureExtractor, extract_features
from .tracker import CorrelationTracker, TrackState

__all__ = [
    "Assignment",
    "IdCounter",
    "associate",
    "hungarian",
    "FeatureExtractor",
    "extract_features",
    "CorrelationTracker",
    "TrackState",
]
