"""On-disk record schemas for the five evaluation schemes.

Trace files are line-delimited JSON: the first line is a header object
``{"schema_version": 1, "scheme": "<name>"}``, every following line is one
record.  Booleans are encoded as 0/1 integers, reals as decimal JSON
numbers at full precision, so ``load_traces(save_traces(r))`` is the
identity.  The header scheme must match the scheme requested at load
time; this file format is the contract between the simulator, the
synthetic generators, and the evaluator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

SCHEMA_VERSION = 1

SCHEMES = ("clf-error", "clf-threat", "det-error", "episodic", "landing-e1", "landing-e2")

VARIANTS = ("f", "f_with_monitor", "f_star")

DEFAULT_ACTION = "default"


class TraceError(ValueError):
    """Base class for trace-file problems."""


class TraceParseError(TraceError):
    """A line could not be decoded into the scheme's record shape."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class TraceVersionError(TraceError):
    """The file declares an unsupported schema version."""


class TraceSchemeError(TraceError):
    """The file's scheme does not match the scheme requested."""


class TraceValidationError(TraceError):
    """A decoded record violates a schema invariant."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


def _bit(value: object, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value not in (0, 1):
        raise TraceError(f"field {field} must be 0 or 1, got {value!r}")
    return value


def _real(value: object, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TraceError(f"field {field} must be a number, got {value!r}")
    return float(value)


# ---------------------------------------------------------------------------
# record types


@dataclass(frozen=True)
class ClassificationRecord:
    example_id: str
    true_label: int
    predicted_label: int
    monitor_flag: int
    threat_flag: int | None = None

    def __post_init__(self) -> None:
        _bit(self.monitor_flag, "monitor_flag")
        if self.threat_flag is not None:
            _bit(self.threat_flag, "threat_flag")


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with a category label; predictions carry a score."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float
    label: int
    score: float = 1.0

    def __post_init__(self) -> None:
        if not self.x_min < self.x_max:
            raise TraceError(f"field x_min must be < x_max, got {self.x_min} >= {self.x_max}")
        if not self.y_min < self.y_max:
            raise TraceError(f"field y_min must be < y_max, got {self.y_min} >= {self.y_max}")
        if not 0.0 <= self.score <= 1.0:
            raise TraceError(f"field score must be in [0, 1], got {self.score}")

    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)


@dataclass(frozen=True)
class DetectionFrameRecord:
    frame_id: str
    ground_truth: tuple[Box, ...]
    predictions: tuple[Box, ...]
    monitor_flag: int

    def __post_init__(self) -> None:
        _bit(self.monitor_flag, "monitor_flag")


@dataclass(frozen=True)
class FrameState:
    t: int
    running: int
    collision: int
    monitor_flag: int
    braked: int

    def __post_init__(self) -> None:
        _bit(self.running, "running")
        _bit(self.collision, "collision")
        _bit(self.monitor_flag, "monitor_flag")
        _bit(self.braked, "braked")


@dataclass(frozen=True)
class EpisodeTrace:
    scenario_id: str
    variant: str
    frames: tuple[FrameState, ...]

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise TraceError(f"field variant must be one of {VARIANTS}, got {self.variant!r}")
        if not self.frames:
            raise TraceError("field frames must be nonempty")
        for i, frame in enumerate(self.frames):
            if frame.t != i:
                raise TraceError(f"field t must increase from 0 in steps of 1, got {frame.t} at index {i}")
        stopped = False
        collisions = 0
        for frame in self.frames:
            if stopped and frame.running:
                raise TraceError(f"field running must stay 0 once 0, violated at t={frame.t}")
            stopped = stopped or frame.running == 0
            collisions += frame.collision
        if collisions > 1:
            raise TraceError(f"field collision must mark at most one frame, got {collisions}")

    @property
    def episode_length(self) -> int:
        return len(self.frames)

    def running_frames(self) -> int:
        return sum(f.running for f in self.frames)

    def collision_frames(self) -> int:
        return sum(f.collision for f in self.frames)


@dataclass(frozen=True)
class LandingCandidate:
    candidate_id: str
    has_forbidden_pixel: int
    mean_hazard: float
    monitor_flag: int

    def __post_init__(self) -> None:
        _bit(self.has_forbidden_pixel, "has_forbidden_pixel")
        _bit(self.monitor_flag, "monitor_flag")
        if not 0.0 <= self.mean_hazard <= 1.0:
            raise TraceError(f"field mean_hazard must be in [0, 1], got {self.mean_hazard}")


@dataclass(frozen=True)
class LandingImageRecord:
    image_id: str
    candidates: tuple[LandingCandidate, ...]
    selected_f: str
    selected_fm: str
    selected_fstar: str

    def __post_init__(self) -> None:
        ids = [c.candidate_id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise TraceError("field candidate_id values must be unique within an image")
        known = set(ids) | {DEFAULT_ACTION}
        for field in ("selected_f", "selected_fm", "selected_fstar"):
            value = getattr(self, field)
            if value not in known:
                raise TraceError(
                    f"field {field} must name a listed candidate or {DEFAULT_ACTION!r}, got {value!r}"
                )


SCHEME_RECORD_TYPES = {
    "clf-error": ClassificationRecord,
    "clf-threat": ClassificationRecord,
    "det-error": DetectionFrameRecord,
    "episodic": EpisodeTrace,
    "landing-e1": LandingImageRecord,
    "landing-e2": LandingImageRecord,
}


# ---------------------------------------------------------------------------
# encoding/decoding (field names and order are the wire contract)


def _box_to_obj(box: Box) -> dict:
    return {
        "x_min": box.x_min,
        "y_min": box.y_min,
        "x_max": box.x_max,
        "y_max": box.y_max,
        "label": box.label,
        "score": box.score,
    }


def _box_from_obj(obj: object, field: str) -> Box:
    if not isinstance(obj, dict):
        raise TraceError(f"field {field} entries must be objects, got {obj!r}")
    return Box(
        x_min=_real(_require(obj, "x_min", field), "x_min"),
        y_min=_real(_require(obj, "y_min", field), "y_min"),
        x_max=_real(_require(obj, "x_max", field), "x_max"),
        y_max=_real(_require(obj, "y_max", field), "y_max"),
        label=_int(_require(obj, "label", field), "label"),
        score=_real(obj.get("score", 1.0), "score"),
    )


def _require(obj: dict, key: str, where: str = "record"):
    if key not in obj:
        raise KeyError(f"{where} is missing field {key}")
    return obj[key]


def _int(value: object, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TraceError(f"field {field} must be an integer, got {value!r}")
    return value


def _str(value: object, field: str) -> str:
    if not isinstance(value, str):
        raise TraceError(f"field {field} must be a string, got {value!r}")
    return value


def _classification_to_obj(r: ClassificationRecord) -> dict:
    obj = {
        "example_id": r.example_id,
        "true_label": r.true_label,
        "predicted_label": r.predicted_label,
        "monitor_flag": r.monitor_flag,
    }
    if r.threat_flag is not None:
        obj["threat_flag"] = r.threat_flag
    return obj


def _classification_from_obj(obj: dict) -> ClassificationRecord:
    return ClassificationRecord(
        example_id=_str(_require(obj, "example_id"), "example_id"),
        true_label=_int(_require(obj, "true_label"), "true_label"),
        predicted_label=_int(_require(obj, "predicted_label"), "predicted_label"),
        monitor_flag=_int(_require(obj, "monitor_flag"), "monitor_flag"),
        threat_flag=_int(obj["threat_flag"], "threat_flag") if "threat_flag" in obj else None,
    )


def _detection_to_obj(r: DetectionFrameRecord) -> dict:
    return {
        "frame_id": r.frame_id,
        "ground_truth": [_box_to_obj(b) for b in r.ground_truth],
        "predictions": [_box_to_obj(b) for b in r.predictions],
        "monitor_flag": r.monitor_flag,
    }


def _detection_from_obj(obj: dict) -> DetectionFrameRecord:
    gt = _require(obj, "ground_truth")
    pred = _require(obj, "predictions")
    if not isinstance(gt, list) or not isinstance(pred, list):
        raise TraceError("fields ground_truth and predictions must be arrays")
    return DetectionFrameRecord(
        frame_id=_str(_require(obj, "frame_id"), "frame_id"),
        ground_truth=tuple(_box_from_obj(b, "ground_truth") for b in gt),
        predictions=tuple(_box_from_obj(b, "predictions") for b in pred),
        monitor_flag=_int(_require(obj, "monitor_flag"), "monitor_flag"),
    )


def _episode_to_obj(r: EpisodeTrace) -> dict:
    return {
        "scenario_id": r.scenario_id,
        "variant": r.variant,
        "frames": [
            {
                "t": f.t,
                "running": f.running,
                "collision": f.collision,
                "monitor_flag": f.monitor_flag,
                "braked": f.braked,
            }
            for f in r.frames
        ],
    }


def _episode_from_obj(obj: dict) -> EpisodeTrace:
    frames_obj = _require(obj, "frames")
    if not isinstance(frames_obj, list):
        raise TraceError("field frames must be an array")
    frames = []
    for f in frames_obj:
        if not isinstance(f, dict):
            raise TraceError(f"field frames entries must be objects, got {f!r}")
        frames.append(
            FrameState(
                t=_int(_require(f, "t", "frame"), "t"),
                running=_int(_require(f, "running", "frame"), "running"),
                collision=_int(_require(f, "collision", "frame"), "collision"),
                monitor_flag=_int(_require(f, "monitor_flag", "frame"), "monitor_flag"),
                braked=_int(_require(f, "braked", "frame"), "braked"),
            )
        )
    return EpisodeTrace(
        scenario_id=_str(_require(obj, "scenario_id"), "scenario_id"),
        variant=_str(_require(obj, "variant"), "variant"),
        frames=tuple(frames),
    )


def _landing_to_obj(r: LandingImageRecord) -> dict:
    return {
        "image_id": r.image_id,
        "candidates": [
            {
                "candidate_id": c.candidate_id,
                "has_forbidden_pixel": c.has_forbidden_pixel,
                "mean_hazard": c.mean_hazard,
                "monitor_flag": c.monitor_flag,
            }
            for c in r.candidates
        ],
        "selected_f": r.selected_f,
        "selected_fm": r.selected_fm,
        "selected_fstar": r.selected_fstar,
    }


def _landing_from_obj(obj: dict) -> LandingImageRecord:
    cands_obj = _require(obj, "candidates")
    if not isinstance(cands_obj, list):
        raise TraceError("field candidates must be an array")
    candidates = []
    for c in cands_obj:
        if not isinstance(c, dict):
            raise TraceError(f"field candidates entries must be objects, got {c!r}")
        candidates.append(
            LandingCandidate(
                candidate_id=_str(_require(c, "candidate_id", "candidate"), "candidate_id"),
                has_forbidden_pixel=_int(_require(c, "has_forbidden_pixel", "candidate"), "has_forbidden_pixel"),
                mean_hazard=_real(_require(c, "mean_hazard", "candidate"), "mean_hazard"),
                monitor_flag=_int(_require(c, "monitor_flag", "candidate"), "monitor_flag"),
            )
        )
    return LandingImageRecord(
        image_id=_str(_require(obj, "image_id"), "image_id"),
        candidates=tuple(candidates),
        selected_f=_str(_require(obj, "selected_f"), "selected_f"),
        selected_fm=_str(_require(obj, "selected_fm"), "selected_fm"),
        selected_fstar=_str(_require(obj, "selected_fstar"), "selected_fstar"),
    )


_TO_OBJ = {
    ClassificationRecord: _classification_to_obj,
    DetectionFrameRecord: _detection_to_obj,
    EpisodeTrace: _episode_to_obj,
    LandingImageRecord: _landing_to_obj,
}

_FROM_OBJ = {
    ClassificationRecord: _classification_from_obj,
    DetectionFrameRecord: _detection_from_obj,
    EpisodeTrace: _episode_from_obj,
    LandingImageRecord: _landing_from_obj,
}


# ---------------------------------------------------------------------------
# file IO


def load_traces(path: str | Path, scheme: str):
    """Parse and validate one trace file, preserving record order.

    Raises TraceParseError / TraceVersionError / TraceSchemeError /
    TraceValidationError with the offending line number where one exists.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    path = Path(path)
    record_type = SCHEME_RECORD_TYPES[scheme]
    from_obj = _FROM_OBJ[record_type]

    records = []
    header_seen = False
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceParseError(line_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise TraceParseError(line_no, f"expected an object, got {obj!r}")
            if not header_seen:
                _check_header(obj, scheme, line_no)
                header_seen = True
                continue
            try:
                record = from_obj(obj)
            except KeyError as exc:
                raise TraceParseError(line_no, str(exc.args[0])) from exc
            except TraceError as exc:
                raise TraceValidationError(str(exc), line_no) from exc
            if scheme == "clf-threat" and record.threat_flag is None:
                raise TraceValidationError(
                    "field threat_flag is required under scheme clf-threat", line_no
                )
            records.append(record)
    if not records:
        raise TraceValidationError(f"no records in {path}")
    return records


def _check_header(obj: dict, scheme: str, line_no: int) -> None:
    if "schema_version" not in obj or "scheme" not in obj:
        raise TraceParseError(line_no, "header must declare schema_version and scheme")
    if obj["schema_version"] != SCHEMA_VERSION:
        raise TraceVersionError(
            f"unsupported schema_version {obj['schema_version']!r}; this toolkit reads version {SCHEMA_VERSION}"
        )
    if obj["scheme"] != scheme:
        raise TraceSchemeError(f"file carries scheme {obj['scheme']!r}, requested {scheme!r}")


def save_traces(records: Sequence, path: str | Path, scheme: str) -> None:
    """Write records as one trace file; round-trips exactly through load_traces."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    records = list(records)
    record_type = SCHEME_RECORD_TYPES[scheme]
    for r in records:
        if type(r) is not record_type:
            raise ValueError(
                f"scheme {scheme!r} stores {record_type.__name__} records, got {type(r).__name__}"
            )
    to_obj = _TO_OBJ[record_type]
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema_version": SCHEMA_VERSION, "scheme": scheme}) + "\n")
        for r in records:
            fh.write(json.dumps(to_obj(r)) + "\n")
