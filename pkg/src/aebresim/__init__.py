"""Open-loop AEB resimulation and brake-event classification toolkit."""

from .aebs import AebsConfig, BrakeEvent, InterventionLevel, simulate_recording
from .classifier import (
    Classification,
    Reason,
    Verdict,
    build_pseudo_ground_truth,
    classify_event,
)
from .geometry import MDSeries, OrientedBox, min_distance, obb_corners, overlap
from .preprocess import PreprocessConfig, prepare_recording
from .store import EventStore, event_id
from .tracks import Recording, parse_recording, validate_recording

__version__ = "0.1.0"

__all__ = [
    "AebsConfig",
    "BrakeEvent",
    "Classification",
    "EventStore",
    "InterventionLevel",
    "MDSeries",
    "OrientedBox",
    "PreprocessConfig",
    "Reason",
    "Recording",
    "Verdict",
    "build_pseudo_ground_truth",
    "classify_event",
    "event_id",
    "min_distance",
    "obb_corners",
    "overlap",
    "parse_recording",
    "prepare_recording",
    "simulate_recording",
    "validate_recording",
    "__version__",
]
