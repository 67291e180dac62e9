"""Direction cosine matrices and 3-2-1 Euler angles.

A rotation is a 3x3 numpy array whose rows are the rotated frame's unit
axes expressed in the reference frame. All angles are in radians; degrees
appear only at I/O boundaries.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateAxes, GimbalLockWarning

#: Degeneracy threshold for axis construction, in input units.
EPS_LEN = 1e-9

#: Orthonormality tolerance for rotation validation, per element.
EPS_ORTHO = 1e-10

#: Pitch margin below +/-pi/2 at which gimbal lock is declared.
GIMBAL_MARGIN = 1e-6


@dataclass(frozen=True)
class EulerYPR:
    """Yaw-pitch-roll angles for the 3-2-1 rotation sequence, radians."""

    yaw: float
    pitch: float
    roll: float

    def as_array(self):
        return np.array([self.yaw, self.pitch, self.roll])


def is_rotation(R, tol=EPS_ORTHO):
    """True when R is orthonormal with determinant +1 within tol."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    return (np.abs(R @ R.T - np.eye(3)).max() <= tol
            and abs(np.linalg.det(R) - 1.0) <= tol)


def dcm_from_axes(x_raw, y_temp):
    """Build a rotation from a primary x-axis and an in-plane companion.

    x is the normalized x_raw; z is normal to the plane of x and y_temp;
    y completes the right-handed triad. Raises DegenerateAxes when the
    inputs are near-zero or near-parallel (occluded/collinear keypoints).
    """
    x_raw = np.asarray(x_raw, dtype=float)
    y_temp = np.asarray(y_temp, dtype=float)
    if np.linalg.norm(x_raw) <= EPS_LEN:
        raise DegenerateAxes("x axis vector is near zero")
    cross = np.cross(x_raw, y_temp)
    if np.linalg.norm(cross) <= EPS_LEN:
        raise DegenerateAxes("axis vectors are near parallel or zero")
    x = x_raw / np.linalg.norm(x_raw)
    z = np.cross(x, y_temp)
    z /= np.linalg.norm(z)
    y = np.cross(z, x)
    return np.array([x, y, z])


def euler321_to_dcm(e):
    """Rotation for the 3-2-1 sequence: R1(roll) @ R2(pitch) @ R3(yaw)."""
    if isinstance(e, EulerYPR):
        yaw, pitch, roll = e.yaw, e.pitch, e.roll
    else:
        yaw, pitch, roll = e
    cy, sy = np.cos(yaw), np.sin(yaw)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cr, sr = np.cos(roll), np.sin(roll)
    return np.array([
        [cp * cy, cp * sy, -sp],
        [sr * sp * cy - cr * sy, sr * sp * sy + cr * cy, sr * cp],
        [cr * sp * cy + sr * sy, cr * sp * sy - sr * cy, cr * cp],
    ])


def dcm_to_euler321(R):
    """Extract 3-2-1 Euler angles from a rotation.

    At |pitch| = pi/2 the roll/yaw split is undefined; roll is set to 0,
    the free angle folds into yaw, and GimbalLockWarning is emitted.
    """
    R = np.asarray(R, dtype=float)
    sp = np.clip(-R[0, 2], -1.0, 1.0)
    pitch = np.arcsin(sp)
    if abs(pitch) > np.pi / 2 - GIMBAL_MARGIN:
        warnings.warn("pitch at +/-90 deg: roll set to 0, free angle in yaw",
                      GimbalLockWarning, stacklevel=2)
        if pitch > 0:
            yaw = -np.arctan2(R[1, 0], R[1, 1])
        else:
            yaw = np.arctan2(-R[1, 0], R[1, 1])
        return EulerYPR(float(yaw), float(pitch), 0.0)
    yaw = np.arctan2(R[0, 1], R[0, 0])
    roll = np.arctan2(R[1, 2], R[2, 2])
    return EulerYPR(float(yaw), float(pitch), float(roll))


def relative_rotation(C_AN, C_BN):
    """Rotation of frame A relative to frame B: C_AB = C_AN @ C_BN^T."""
    return np.asarray(C_AN, dtype=float) @ np.asarray(C_BN, dtype=float).T


def unwrap_angles(series):
    """Remove 2*pi jumps so consecutive differences stay within pi."""
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValueError("empty angle series")
    return np.unwrap(series)
