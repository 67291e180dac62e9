"""Shared synthetic fixtures: a rest-pose lizard, rigid rotations of it,
and CSV dataset builders."""

import io

import numpy as np
import pytest

from bioright import keypoints

# Rest pose in meters: body along +x, lizard lying in the x-y plane,
# all segment frames equal to the identity (legs along +y).
REST_POSE = {
    1: (0.30, 0.00, 0.0),    # Neck
    2: (0.33, 0.01, 0.0),    # Eye_Left
    3: (0.33, -0.01, 0.0),   # Eye_Right
    4: (0.36, 0.00, 0.01),   # Mouth_Front_Top
    5: (0.36, 0.00, -0.01),  # Mouth_Front_Bottom
    6: (0.34, -0.02, 0.0),   # Mouth_Back_Right
    7: (0.34, 0.02, 0.0),    # Mouth_Back_Left
    8: (0.25, -0.15, 0.0),   # Wrist_Right
    9: (0.25, 0.15, 0.0),    # Wrist_Left
    10: (0.25, -0.10, 0.0),  # Elbow_Right
    11: (0.25, 0.10, 0.0),   # Elbow_Left
    12: (0.25, -0.05, 0.0),  # Shoulder_Right
    13: (0.25, 0.05, 0.0),   # Shoulder_Left
    14: (0.12, 0.00, 0.0),   # Torso_Mid_Back
    15: (-0.02, -0.14, 0.0),  # Ankle_Right
    16: (-0.02, 0.14, 0.0),   # Ankle_Left
    17: (-0.02, -0.09, 0.0),  # Knee_Right
    18: (-0.02, 0.09, 0.0),   # Knee_Left
    19: (-0.02, -0.04, 0.0),  # Hip_Right
    20: (-0.02, 0.04, 0.0),   # Hip_Left
    21: (0.00, 0.00, 0.0),    # Tail_Top_Back (vent)
    22: (-0.15, 0.00, 0.0),   # Tail_Mid_Back
    23: (-0.30, 0.00, 0.0),   # Tail_End_Back
}


def roll_matrix(angle):
    """Active rotation of points about the inertial x axis."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotate_pose(pose, R):
    return {kid: R @ np.asarray(p) for kid, p in pose.items()}


def random_rotation(rng):
    """Uniform-ish random rotation via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def dataset_from_poses(poses, frame_rate=1000.0, visible=None):
    """Build a 3D meter dataset from a list of pose dicts (one per frame).

    visible[kid][frame] masks individual samples when given.
    """
    frame_count = len(poses)
    tracks = {}
    for kid, name in keypoints.KEYPOINT_NAMES.items():
        frames_idx = np.arange(frame_count)
        positions = np.array([poses[f][kid] for f in range(frame_count)],
                             dtype=float)
        vis = np.ones(frame_count, dtype=bool)
        if visible is not None and kid in visible:
            vis = np.asarray(visible[kid], dtype=bool).copy()
        positions = positions.copy()
        positions[~vis] = np.nan
        tracks[kid] = keypoints.KeypointTrack(kid, name, frames_idx,
                                              positions, vis)
    return keypoints.KeypointDataset(tracks, frame_rate, frame_count, "meter")


def csv_text(rows, has_z=False):
    """Build dataset CSV text from (frame, id, x, y[, z], visible) tuples."""
    header = "frame,keypoint_id,keypoint_name,x,y" + (",z" if has_z else "") \
        + ",visible"
    lines = [header]
    for row in rows:
        frame, kid = row[0], row[1]
        name = keypoints.KEYPOINT_NAMES[kid]
        coords = ",".join(repr(float(c)) for c in row[2:-1])
        lines.append(f"{frame},{kid},{name},{coords},{row[-1]}")
    return "\n".join(lines) + "\n"


def full_csv_dataset(frame_count=140, step=(0.5, 0.0)):
    """CSV text with all 23 keypoints visible every frame, constant velocity."""
    rows = []
    for f in range(frame_count):
        for kid in keypoints.KEYPOINT_NAMES:
            x = 10.0 * kid + step[0] * f
            y = 5.0 * kid + step[1] * f
            rows.append((f, kid, x, y, 1))
    return csv_text(rows)


@pytest.fixture
def rest_dataset():
    return dataset_from_poses([REST_POSE] * 5)


@pytest.fixture
def rolling_dataset():
    """Rigid 0 -> 360 deg roll over 101 frames at 1 kHz."""
    n = 101
    poses = [rotate_pose(REST_POSE, roll_matrix(2 * np.pi * f / (n - 1)))
             for f in range(n)]
    return dataset_from_poses(poses)


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance-criterion pass/fail lines after the test run."""
    try:
        import test_acceptance
    except ImportError:
        return
    lines = getattr(test_acceptance, "SUMMARY_LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


def load_csv(text, frame_rate=1000.0):
    return keypoints.load_dataset(io.StringIO(text), format="csv",
                                  frame_rate=frame_rate)
