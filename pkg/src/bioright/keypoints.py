"""Keypoint time-series: data model, CSV/JSON ingestion, identity
re-association, gap interpolation, and the planar pixel-to-world map."""

import csv
import io
import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import (AlreadyWorldUnits, EmptyDataset, ParseError, SchemaError,
                     TooSparse)

#: Canonical keypoint names, id 1..23.
KEYPOINT_NAMES = {
    1: "Neck",
    2: "Eye_Left",
    3: "Eye_Right",
    4: "Mouth_Front_Top",
    5: "Mouth_Front_Bottom",
    6: "Mouth_Back_Right",
    7: "Mouth_Back_Left",
    8: "Wrist_Right",
    9: "Wrist_Left",
    10: "Elbow_Right",
    11: "Elbow_Left",
    12: "Shoulder_Right",
    13: "Shoulder_Left",
    14: "Torso_Mid_Back",
    15: "Ankle_Right",
    16: "Ankle_Left",
    17: "Knee_Right",
    18: "Knee_Left",
    19: "Hip_Right",
    20: "Hip_Left",
    21: "Tail_Top_Back",
    22: "Tail_Mid_Back",
    23: "Tail_End_Back",
}


@dataclass
class KeypointTrack:
    """Position time-series for one keypoint.

    frames is strictly increasing; positions is (N, 2) or (N, 3) in a
    single unit; invisible samples hold NaN positions.
    """

    id: int
    name: str
    frames: np.ndarray
    positions: np.ndarray
    visible: np.ndarray
    interpolated: np.ndarray = None

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=int)
        self.positions = np.asarray(self.positions, dtype=float)
        self.visible = np.asarray(self.visible, dtype=bool)
        if self.interpolated is None:
            self.interpolated = np.zeros(len(self.frames), dtype=bool)
        else:
            self.interpolated = np.asarray(self.interpolated, dtype=bool)
        if np.any(np.diff(self.frames) <= 0):
            raise SchemaError(f"track {self.id}: frame indices not strictly increasing")
        if self.positions.ndim != 2 or self.positions.shape[1] not in (2, 3):
            raise SchemaError(f"track {self.id}: positions must be (N, 2) or (N, 3)")

    @property
    def dim(self):
        return self.positions.shape[1]

    def visible_positions(self):
        return self.positions[self.visible]


@dataclass
class KeypointDataset:
    """All tracks of one recording plus the timing metadata."""

    tracks: dict
    frame_rate: float
    frame_count: int
    unit: str

    def __post_init__(self):
        if self.unit not in ("pixel", "meter"):
            raise SchemaError(f"unknown unit {self.unit!r}")
        if self.frame_rate <= 0:
            raise SchemaError("frame_rate must be positive")
        for kid, track in self.tracks.items():
            if kid != track.id:
                raise SchemaError(f"track map key {kid} != track id {track.id}")
            if track.id not in KEYPOINT_NAMES:
                raise SchemaError(f"keypoint id {track.id} out of range 1-23")
            if track.name != KEYPOINT_NAMES[track.id]:
                raise SchemaError(
                    f"keypoint {track.id} named {track.name!r}, "
                    f"expected {KEYPOINT_NAMES[track.id]!r}")
            if len(track.frames) and track.frames[-1] + 1 > self.frame_count:
                raise SchemaError(f"track {track.id} exceeds frame_count")


@dataclass(frozen=True)
class PlanarCalibration:
    """Single-plane pixel-to-meter map; z of the world plane is 0."""

    scale: float
    origin_pixel: tuple
    image_y_down: bool = True

    def __post_init__(self):
        if self.scale <= 0:
            raise SchemaError("scale must be positive")


@dataclass(frozen=True)
class SwapEvent:
    """One re-association episode (consecutive frames merged) or a kept jump."""

    from_id: int
    to_id: int
    frame_start: int
    frame_end: int
    kind: str  # "swap" or "jump"


def _parse_float(token, what):
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"bad {what}: {token!r}") from None


def _parse_int(token, what):
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"bad {what}: {token!r}") from None


def load_dataset(source, format="csv", frame_rate=None, unit="pixel"):
    """Read a dataset from a byte/text stream or path.

    CSV carries no frame rate, so frame_rate is required there; JSON
    carries frame_rate, frame_count, and unit itself. Missing (frame,
    keypoint) rows become invisible samples.
    """
    close = False
    if isinstance(source, os.PathLike) or (
            isinstance(source, str) and "\n" not in source):
        source = open(source, "rb")
        close = True
    try:
        if format == "csv":
            return _load_csv(source, frame_rate, unit)
        if format == "json":
            return _load_json(source)
        raise ValueError(f"unknown format {format!r}")
    finally:
        if close:
            source.close()


def _as_text(source):
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return io.StringIO(data)


def _load_csv(source, frame_rate, unit):
    if frame_rate is None:
        raise SchemaError("frame_rate is required for CSV input (never inferred)")
    reader = csv.reader(_as_text(source))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyDataset("no header row") from None
    if header[:4] != ["frame", "keypoint_id", "keypoint_name", "x"]:
        raise ParseError(f"unexpected header {header!r}")
    has_z = "z" in header
    ncol = 7 if has_z else 6
    rows = {}  # id -> {frame: (pos, visible)}
    names = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != ncol:
            raise ParseError(f"line {lineno}: expected {ncol} fields, got {len(row)}")
        frame = _parse_int(row[0], "frame")
        kid = _parse_int(row[1], "keypoint_id")
        name = row[2]
        if kid not in KEYPOINT_NAMES:
            raise SchemaError(f"line {lineno}: keypoint id {kid} out of range 1-23")
        if name != KEYPOINT_NAMES[kid]:
            raise SchemaError(f"line {lineno}: unknown keypoint name {name!r} for id {kid}")
        coords = [_parse_float(tok, "coordinate") for tok in row[3:ncol - 1]]
        vis = row[ncol - 1]
        if vis not in ("0", "1"):
            raise ParseError(f"line {lineno}: visible must be 0 or 1, got {vis!r}")
        per = rows.setdefault(kid, {})
        if frame in per:
            raise SchemaError(f"line {lineno}: duplicate (frame {frame}, keypoint {kid})")
        per[frame] = (coords, vis == "1")
        names[kid] = name
    if not rows:
        raise EmptyDataset("no data rows")
    frame_count = 1 + max(max(per) for per in rows.values())
    dim = 3 if has_z else 2
    tracks = {}
    for kid in sorted(rows):
        per = rows[kid]
        frames = np.arange(frame_count)
        positions = np.full((frame_count, dim), np.nan)
        visible = np.zeros(frame_count, dtype=bool)
        for frame, (coords, vis) in per.items():
            positions[frame] = coords
            visible[frame] = vis
        positions[~visible] = np.nan
        tracks[kid] = KeypointTrack(kid, names[kid], frames, positions, visible)
    return KeypointDataset(tracks, float(frame_rate), frame_count, unit)


def _load_json(source):
    try:
        obj = json.load(_as_text(source))
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc}") from None
    for key in ("frame_rate", "frame_count", "unit", "tracks"):
        if key not in obj:
            raise ParseError(f"missing top-level key {key!r}")
    if not obj["tracks"]:
        raise EmptyDataset("no tracks")
    tracks = {}
    for t in obj["tracks"]:
        kid = t["id"]
        if kid in tracks:
            raise SchemaError(f"duplicate keypoint id {kid}")
        samples = t["samples"]
        frames = np.array([s["frame"] for s in samples], dtype=int)
        has_z = samples and "z" in samples[0]
        if has_z:
            positions = np.array([[s["x"], s["y"], s["z"]] for s in samples])
        else:
            positions = np.array([[s["x"], s["y"]] for s in samples])
        visible = np.array([bool(s["visible"]) for s in samples])
        tracks[kid] = KeypointTrack(kid, t["name"], frames,
                                    positions.reshape(len(samples), -1), visible)
    return KeypointDataset(tracks, float(obj["frame_rate"]),
                           int(obj["frame_count"]), obj["unit"])


def save_dataset(dataset, stream, format="csv"):
    """Write a dataset back out; inverse of load_dataset on valid data."""
    if format == "csv":
        some = next(iter(dataset.tracks.values()))
        has_z = some.dim == 3
        cols = ["frame", "keypoint_id", "keypoint_name", "x", "y"] + \
            (["z"] if has_z else []) + ["visible"]
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(cols)
        for kid in sorted(dataset.tracks):
            track = dataset.tracks[kid]
            for i, frame in enumerate(track.frames):
                pos = track.positions[i]
                coords = [repr(float(c)) for c in pos] if track.visible[i] \
                    else ["nan"] * track.dim
                writer.writerow([int(frame), kid, track.name, *coords,
                                 int(track.visible[i])])
    elif format == "json":
        obj = {
            "frame_rate": dataset.frame_rate,
            "frame_count": dataset.frame_count,
            "unit": dataset.unit,
            "tracks": [],
        }
        for kid in sorted(dataset.tracks):
            track = dataset.tracks[kid]
            samples = []
            for i, frame in enumerate(track.frames):
                s = {"frame": int(frame),
                     "x": float(track.positions[i][0]),
                     "y": float(track.positions[i][1]),
                     "visible": bool(track.visible[i])}
                if track.dim == 3:
                    s["z"] = float(track.positions[i][2])
                samples.append(s)
            obj["tracks"].append({"id": kid, "name": track.name, "samples": samples})
        json.dump(obj, stream)
    else:
        raise ValueError(f"unknown format {format!r}")


def reassociate_identities(dataset, max_jump):
    """Re-match detections whose frame-to-frame displacement exceeds max_jump.

    Offending detections in a frame are greedily reassigned (in id order)
    to the offending track whose last-known position is nearest, ties to
    the lower id. The per-frame multiset of detections is preserved.
    Returns (new dataset, list of SwapEvent).
    """
    some = next(iter(dataset.tracks.values()))
    if some.dim != 2:
        raise SchemaError("re-association is defined for 2D datasets")
    ids = sorted(dataset.tracks)
    positions = {kid: dataset.tracks[kid].positions.copy() for kid in ids}
    visible = {kid: dataset.tracks[kid].visible for kid in ids}
    last = {kid: None for kid in ids}
    raw_events = []  # (frame, from_id, to_id, kind)
    for f in range(dataset.frame_count):
        offenders = []
        for kid in ids:
            if not visible[kid][f]:
                continue
            if last[kid] is not None:
                jump = np.linalg.norm(positions[kid][f] - last[kid])
                if jump > max_jump:
                    offenders.append(kid)
        if len(offenders) >= 2:
            detections = {kid: positions[kid][f].copy() for kid in offenders}
            free = list(offenders)
            assign = {}
            for kid in offenders:
                dists = [(np.linalg.norm(detections[kid] - last[t]), t) for t in free]
                dists.sort()
                target = dists[0][1]
                assign[kid] = target
                free.remove(target)
            for kid, target in assign.items():
                if target != kid:
                    positions[target][f] = detections[kid]
                    raw_events.append((f, kid, target, "swap"))
        elif len(offenders) == 1:
            raw_events.append((f, offenders[0], offenders[0], "jump"))
        for kid in ids:
            if visible[kid][f]:
                last[kid] = positions[kid][f]
    events = _merge_events(raw_events)
    tracks = {kid: replace(dataset.tracks[kid], positions=positions[kid])
              for kid in ids}
    new = KeypointDataset(tracks, dataset.frame_rate, dataset.frame_count,
                          dataset.unit)
    return new, events


def _merge_events(raw):
    """Collapse per-frame events into per-episode SwapEvents."""
    events = []
    open_events = {}  # (from, to, kind) -> [start, end]
    for f, src, dst, kind in sorted(raw):
        key = (src, dst, kind)
        span = open_events.get(key)
        if span is not None and span[1] == f - 1:
            span[1] = f
        else:
            if span is not None:
                events.append(SwapEvent(src, dst, span[0], span[1], kind))
            open_events[key] = [f, f]
    for (src, dst, kind), span in open_events.items():
        events.append(SwapEvent(src, dst, span[0], span[1], kind))
    events.sort(key=lambda e: (e.frame_start, e.from_id))
    return events


def interpolate_gaps(track, max_gap):
    """Linearly fill invisible runs of length <= max_gap between visible
    samples; filled samples are marked interpolated. Longer runs and
    leading/trailing runs are untouched."""
    if int(track.visible.sum()) < 2:
        raise TooSparse(f"track {track.id}: need >= 2 visible samples")
    positions = track.positions.copy()
    visible = track.visible.copy()
    interpolated = track.interpolated.copy()
    vis_idx = np.flatnonzero(track.visible)
    for a, b in zip(vis_idx[:-1], vis_idx[1:]):
        gap = b - a - 1
        if gap == 0 or gap > max_gap:
            continue
        for i in range(a + 1, b):
            w = (i - a) / (b - a)
            positions[i] = (1 - w) * track.positions[a] + w * track.positions[b]
            visible[i] = True
            interpolated[i] = True
    return replace(track, positions=positions, visible=visible,
                   interpolated=interpolated)


def pixel_to_world(dataset, calib):
    """Map a 2D pixel dataset into a planar world frame in meters.

    The world x-y plane is the image plane (y flipped when the image y
    axis points down); z = 0 for every point.
    """
    if dataset.unit != "pixel":
        raise AlreadyWorldUnits("dataset already in meters")
    ox, oy = calib.origin_pixel
    ysign = -1.0 if calib.image_y_down else 1.0
    tracks = {}
    for kid, track in dataset.tracks.items():
        world = np.full((len(track.frames), 3), np.nan)
        world[:, 0] = (track.positions[:, 0] - ox) * calib.scale
        world[:, 1] = ysign * (track.positions[:, 1] - oy) * calib.scale
        world[:, 2] = 0.0
        world[~track.visible] = np.nan
        tracks[kid] = replace(track, positions=world)
    return KeypointDataset(tracks, dataset.frame_rate, dataset.frame_count,
                           "meter")
