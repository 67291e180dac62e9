"""Body-segment frame construction from keypoints and orientation
time-series (inertial and leg-relative-to-body)."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import rotmath
from .errors import (DegenerateAxes, EmptyWindow, MissingKeypoint,
                     NoValidFrames, TimeGridMismatch)

# Keypoint ids used by the recipes.
NECK, VENT, TAIL_TIP = 1, 21, 23
SHOULDER_RIGHT, SHOULDER_LEFT = 12, 13
HIP_RIGHT, HIP_LEFT = 19, 20
WRIST_RIGHT, WRIST_LEFT = 8, 9
ANKLE_RIGHT, ANKLE_LEFT = 15, 16

X_INERTIAL = np.array([1.0, 0.0, 0.0])


class Segment(Enum):
    BODY = "Body"
    TAIL = "Tail"
    LEFT_FRONT_LEG = "LeftFrontLeg"
    LEFT_HIND_LEG = "LeftHindLeg"
    RIGHT_FRONT_LEG = "RightFrontLeg"
    RIGHT_HIND_LEG = "RightHindLeg"


#: Leg y-axis recipes: (from keypoint, to keypoint). Right legs point
#: limb-to-body, left legs body-to-limb.
LEG_AXES = {
    Segment.RIGHT_FRONT_LEG: (WRIST_RIGHT, SHOULDER_RIGHT),
    Segment.RIGHT_HIND_LEG: (ANKLE_RIGHT, HIP_RIGHT),
    Segment.LEFT_FRONT_LEG: (SHOULDER_LEFT, WRIST_LEFT),
    Segment.LEFT_HIND_LEG: (HIP_LEFT, ANKLE_LEFT),
}

REQUIRED_KEYPOINTS = {
    Segment.BODY: (NECK, VENT, SHOULDER_RIGHT, SHOULDER_LEFT),
    Segment.TAIL: (TAIL_TIP, VENT, HIP_RIGHT, HIP_LEFT),
    Segment.LEFT_FRONT_LEG: LEG_AXES[Segment.LEFT_FRONT_LEG],
    Segment.LEFT_HIND_LEG: LEG_AXES[Segment.LEFT_HIND_LEG],
    Segment.RIGHT_FRONT_LEG: LEG_AXES[Segment.RIGHT_FRONT_LEG],
    Segment.RIGHT_HIND_LEG: LEG_AXES[Segment.RIGHT_HIND_LEG],
}


@dataclass
class SegmentFrameSeries:
    """Time-indexed orientation of one segment: rotations C_SN plus the
    unwrapped 3-2-1 Euler series, with per-sample validity."""

    segment: Segment
    times: np.ndarray
    rotations: list
    euler: np.ndarray  # (N, 3) yaw, pitch, roll; NaN where invalid
    valid: np.ndarray
    metadata: dict = field(default_factory=dict)


def _require(positions, ids):
    for kid in ids:
        if kid not in positions:
            raise MissingKeypoint(f"keypoint {kid} required but absent")


def body_frame(positions):
    """C_BN: x along vent->neck, x-y plane through the shoulder line."""
    _require(positions, REQUIRED_KEYPOINTS[Segment.BODY])
    x_raw = np.asarray(positions[NECK]) - np.asarray(positions[VENT])
    y_temp = np.asarray(positions[SHOULDER_LEFT]) - np.asarray(positions[SHOULDER_RIGHT])
    return rotmath.dcm_from_axes(x_raw, y_temp)


def tail_frame(positions):
    """C_TN: x along vent->tail tip, x-y plane through the hip line."""
    _require(positions, REQUIRED_KEYPOINTS[Segment.TAIL])
    x_raw = np.asarray(positions[TAIL_TIP]) - np.asarray(positions[VENT])
    y_temp = np.asarray(positions[HIP_RIGHT]) - np.asarray(positions[HIP_LEFT])
    return rotmath.dcm_from_axes(x_raw, y_temp)


def leg_frame(segment, positions):
    """C_LiN for one leg.

    y runs along the limb (recipe in LEG_AXES); z is normal to the plane
    of y and the inertial x axis (z = x_N cross y, a fixed cross-product
    order so the sign is deterministic and roll-equivariant); x completes
    the triad as y cross z.
    """
    if segment not in LEG_AXES:
        raise ValueError(f"{segment} is not a leg")
    a, b = LEG_AXES[segment]
    _require(positions, (a, b))
    y_raw = np.asarray(positions[b], dtype=float) - np.asarray(positions[a], dtype=float)
    ny = np.linalg.norm(y_raw)
    if ny <= rotmath.EPS_LEN:
        raise DegenerateAxes(f"{segment.value}: zero-length limb axis")
    y = y_raw / ny
    z = np.cross(X_INERTIAL, y)
    nz = np.linalg.norm(z)
    if nz <= rotmath.EPS_LEN:
        raise DegenerateAxes(f"{segment.value}: limb parallel to inertial x")
    z /= nz
    x = np.cross(y, z)
    return np.array([x, y, z])


def segment_frame(segment, positions):
    if segment is Segment.BODY:
        return body_frame(positions)
    if segment is Segment.TAIL:
        return tail_frame(positions)
    return leg_frame(segment, positions)


def _unwrap_valid_runs(euler, valid):
    """Unwrap each Euler channel independently over contiguous valid runs."""
    out = euler.copy()
    n = len(valid)
    i = 0
    while i < n:
        if not valid[i]:
            i += 1
            continue
        j = i
        while j < n and valid[j]:
            j += 1
        for c in range(3):
            out[i:j, c] = rotmath.unwrap_angles(euler[i:j, c])
        i = j
    return out


def _series_from_rotations(segment, times, rotations, valid, metadata):
    euler = np.full((len(times), 3), np.nan)
    for i, ok in enumerate(valid):
        if ok:
            e = rotmath.dcm_to_euler321(rotations[i])
            euler[i] = (e.yaw, e.pitch, e.roll)
    euler = _unwrap_valid_runs(euler, valid)
    return SegmentFrameSeries(segment, np.asarray(times, dtype=float),
                              rotations, euler, np.asarray(valid, dtype=bool),
                              metadata)


def segment_series(dataset, segment):
    """Per-frame frame construction for one segment over a 3D dataset.

    Frames with missing, invisible, or degenerate keypoints are marked
    invalid; Euler angles are unwrapped over contiguous valid runs.
    """
    if dataset.unit != "meter":
        raise ValueError("segment_series needs a dataset in meters")
    needed = REQUIRED_KEYPOINTS[segment]
    times = np.arange(dataset.frame_count) / dataset.frame_rate
    rotations = []
    valid = np.zeros(dataset.frame_count, dtype=bool)
    for f in range(dataset.frame_count):
        positions = {}
        for kid in needed:
            track = dataset.tracks.get(kid)
            if track is None:
                continue
            idx = np.searchsorted(track.frames, f)
            if idx < len(track.frames) and track.frames[idx] == f and track.visible[idx]:
                positions[kid] = track.positions[idx]
        try:
            R = segment_frame(segment, positions)
        except (MissingKeypoint, DegenerateAxes):
            rotations.append(None)
            continue
        rotations.append(R)
        valid[f] = True
    if not valid.any():
        raise NoValidFrames(f"no valid frames for {segment.value}")
    metadata = {"tail_x_direction": "vent_to_tip",
                "hip_y_temp_direction": "left_to_right"}
    return _series_from_rotations(segment, times, rotations, valid, metadata)


def relative_leg_series(leg, body):
    """Per-sample rotation of a leg relative to the body: C_LiB = C_LiN C_BN^T."""
    if len(leg.times) != len(body.times) or not np.allclose(
            leg.times, body.times, rtol=0, atol=1e-12):
        raise TimeGridMismatch("leg and body series on different time grids")
    valid = leg.valid & body.valid
    rotations = []
    for i, ok in enumerate(valid):
        if ok:
            rotations.append(rotmath.relative_rotation(leg.rotations[i],
                                                       body.rotations[i]))
        else:
            rotations.append(None)
    metadata = dict(leg.metadata)
    metadata["relative_to"] = "Body"
    return _series_from_rotations(leg.segment, leg.times, rotations, valid,
                                  metadata)


def righting_window(series, t_start, t_end):
    """Sub-series restricted to [t_start, t_end], times re-zeroed."""
    if t_start >= t_end:
        raise ValueError("t_start must precede t_end")
    mask = (series.times >= t_start) & (series.times <= t_end)
    if not mask.any():
        raise EmptyWindow(f"no samples in [{t_start}, {t_end}] s")
    idx = np.flatnonzero(mask)
    return SegmentFrameSeries(
        series.segment,
        series.times[idx] - t_start,
        [series.rotations[i] for i in idx],
        series.euler[idx],
        series.valid[idx],
        dict(series.metadata),
    )


def write_series_csv(series, stream):
    """Emit `t,yaw_deg,pitch_deg,roll_deg,valid` with 4-decimal degrees."""
    stream.write("t,yaw_deg,pitch_deg,roll_deg,valid\n")
    deg = np.degrees(series.euler)
    for i, t in enumerate(series.times):
        if series.valid[i]:
            stream.write(f"{t:.6f},{deg[i, 0]:.4f},{deg[i, 1]:.4f},"
                         f"{deg[i, 2]:.4f},1\n")
        else:
            stream.write(f"{t:.6f},,,,0\n")
