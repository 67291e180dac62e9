"""Tracking-quality metrics and stability classification for keypoint
tracks: movement, visibility, gap structure, variance, drift, and a
five-level stability category."""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import TooSparse

#: Path length below which a track counts as stationary for drift scoring.
DRIFT_EPS = 1e-12

# Classification thresholds (decision ladder, evaluated in order).
OCCLUDED_GAP_FRACTION = 0.40
FREQ_OCCLUDED_VISIBILITY = 50.0
DRIFTING_SCORE = 0.6
MODERATE_SCORE = 0.3


class StabilityCategory(Enum):
    """Severity-ordered tracking quality classes."""

    STABLE = "Stable"
    MODERATELY_STABLE = "ModeratelyStable"
    DRIFTING = "Drifting"
    FREQUENTLY_OCCLUDED = "FrequentlyOccluded"
    OCCLUDED = "Occluded"


@dataclass
class KeypointMetrics:
    id: int
    average_movement: float
    normalized_movement: float
    visibility: float
    max_gap_length: int
    position_variance: float
    drift_score: float


@dataclass
class ReportRow:
    """One stability-report line; metrics is None when uncomputable."""

    id: int
    name: str
    metrics: KeypointMetrics = None
    category: StabilityCategory = None
    reason: str = None


def average_movement(track):
    """Mean Euclidean displacement over consecutive visible-sample pairs.

    Pairs spanning an invisible gap are excluded.
    """
    vis = np.flatnonzero(track.visible)
    if len(vis) < 2:
        raise TooSparse(f"track {track.id}: need >= 2 visible samples")
    consecutive = vis[1:][np.diff(vis) == 1]
    if len(consecutive) == 0:
        raise TooSparse(f"track {track.id}: no consecutive visible pairs")
    steps = track.positions[consecutive] - track.positions[consecutive - 1]
    return float(np.mean(np.linalg.norm(steps, axis=1)))


def visibility(track, frame_count):
    """Percent of frames in which the keypoint is tracked."""
    if frame_count < 1:
        raise ValueError("frame_count must be >= 1")
    return 100.0 * float(track.visible.sum()) / frame_count


def normalized_movement(dataset):
    """Per-track average movement divided by the dataset maximum."""
    movements = {}
    for kid, track in dataset.tracks.items():
        try:
            movements[kid] = average_movement(track)
        except TooSparse:
            continue
    if not movements:
        raise TooSparse("no track has a computable average movement")
    peak = max(movements.values())
    if peak == 0.0:
        return {kid: 1.0 for kid in movements}
    return {kid: m / peak for kid, m in movements.items()}


def max_gap_length(track):
    """Longest run of invisible frames; leading/trailing runs count."""
    best = run = 0
    for v in track.visible:
        run = 0 if v else run + 1
        best = max(best, run)
    return best


def position_variance(track):
    """Sum over coordinates of the population variance of visible positions."""
    pos = track.visible_positions()
    if len(pos) < 2:
        raise TooSparse(f"track {track.id}: need >= 2 visible samples")
    return float(np.sum(np.var(pos, axis=0)))


def drift_score(track):
    """1 - net displacement / path length over visible samples, in [0, 1].

    0 for perfectly directed motion, toward 1 for jitter with no net
    motion; stationary tracks score 0.
    """
    pos = track.visible_positions()
    if len(pos) < 3:
        raise TooSparse(f"track {track.id}: need >= 3 visible samples")
    steps = np.diff(pos, axis=0)
    path = float(np.sum(np.linalg.norm(steps, axis=1)))
    if path < DRIFT_EPS:
        return 0.0
    net = float(np.linalg.norm(pos[-1] - pos[0]))
    return float(np.clip(1.0 - net / path, 0.0, 1.0))


def classify_stability(m, frame_count, variance_median=math.inf):
    """Walk the decision ladder from worst to best category.

    variance_median is the dataset-wide median position variance; when
    omitted the variance clause cannot fire.
    """
    if m.max_gap_length >= OCCLUDED_GAP_FRACTION * frame_count:
        return StabilityCategory.OCCLUDED
    if m.visibility < FREQ_OCCLUDED_VISIBILITY:
        return StabilityCategory.FREQUENTLY_OCCLUDED
    if m.drift_score > DRIFTING_SCORE:
        return StabilityCategory.DRIFTING
    if m.drift_score > MODERATE_SCORE or m.position_variance > variance_median:
        return StabilityCategory.MODERATELY_STABLE
    return StabilityCategory.STABLE


def compute_metrics(track, frame_count, norm_movement):
    return KeypointMetrics(
        id=track.id,
        average_movement=average_movement(track),
        normalized_movement=norm_movement,
        visibility=visibility(track, frame_count),
        max_gap_length=max_gap_length(track),
        position_variance=position_variance(track),
        drift_score=drift_score(track),
    )


def stability_report(dataset):
    """One ReportRow per keypoint, ordered by id.

    Per-track failures become null-metric rows with a reason code rather
    than aborting the report.
    """
    try:
        norm = normalized_movement(dataset)
    except TooSparse:
        norm = {}
    variances = []
    for track in dataset.tracks.values():
        try:
            variances.append(position_variance(track))
        except TooSparse:
            pass
    variance_median = float(np.median(variances)) if variances else math.inf
    rows = []
    for kid in sorted(dataset.tracks):
        track = dataset.tracks[kid]
        try:
            m = compute_metrics(track, dataset.frame_count, norm.get(kid, 0.0))
        except TooSparse:
            rows.append(ReportRow(kid, track.name, reason="too_sparse"))
            continue
        cat = classify_stability(m, dataset.frame_count, variance_median)
        rows.append(ReportRow(kid, track.name, metrics=m, category=cat))
    return rows


def write_report_csv(rows, stream):
    """Emit the stability report with 2-decimal fixed formatting.

    Variance is the population (not sample) variance.
    """
    stream.write("keypoint_id,name,avg_movement,norm_movement,"
                 "visibility_pct,max_gap,pos_variance,drift_score,category\n")
    for row in rows:
        if row.metrics is None:
            stream.write(f"{row.id},{row.name},,,,,,,{row.reason}\n")
            continue
        m = row.metrics
        stream.write(
            f"{row.id},{row.name},{m.average_movement:.2f},"
            f"{m.normalized_movement:.2f},{m.visibility:.2f},"
            f"{m.max_gap_length},{m.position_variance:.2f},"
            f"{m.drift_score:.2f},{row.category.value}\n")
