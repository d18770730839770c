"""Sleep bout segmentation, fragmentation features, sleep-movement frames,
and the 206-feature per-subject sleep summary.

Sleep bouts are prolonged quiet regions (rolling MSD < 0.01 g) merged
across suprathreshold interruptions of two minutes or less and retained
when the merged span reaches two hours.  Movement segments are runs above
0.05 g lasting at least 10 s inside a bout; each segment is tiled into
contiguous 5 s frames, and frames whose own MSD exceeds 0.005 g contribute
movement features (intensity, per-axis medians, dynamics).  Fragmentation
features histogram the quiet-interval and movement-interval durations,
including the leading and trailing quiet gaps of each bout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dynamics import DynamicsFeatures, frame_dynamics, raw_intensity
from .errors import InsufficientFrames
from .features import AXIS_PAIRS, SLEEP_FEATURE_NAMES
from .gait import FRAME_DURATION_S, _FRAME_SKIP_ERRORS
from .ingest import TriaxialRecording
from .sigproc import MsdSeries, boolean_runs, group_runs, magnitude, rolling_msd

SLEEP_MSD_THRESHOLD_G = 0.01
SLEEP_MAX_INTERRUPT_S = 120.0
SLEEP_MIN_BOUT_S = 7200.0
MOVEMENT_MSD_THRESHOLD_G = 0.05
MOVEMENT_MIN_S = 10.0
MOVEMENT_FRAME_MIN_MSD_G = 0.005

# Right-closed histogram delimiters for the five duration bins.
SLEEP_DUR_DELIMITERS_MIN = (4.0, 8.0, 16.0, 32.0)
MOVE_DUR_DELIMITERS_S = (12.0, 25.0, 100.0, 200.0)


@dataclass
class SleepBout:
    """One sleep bout with its detected within-bout movement segments."""

    start_idx: int
    end_idx: int
    movement_segments: list[tuple[int, int]] = field(default_factory=list)


@dataclass(frozen=True)
class FragmentationFeatures:
    sleep_dur_prob: np.ndarray  # (5,)
    move_dur_prob: np.ndarray  # (5,)


@dataclass(frozen=True)
class SleepMovementFrame:
    """Frame-level features of one qualifying 5 s sleep-movement frame."""

    start_idx: int
    msd_g: float
    pl: float
    mad: float
    median_x: float
    median_y: float
    median_z: float
    dynamics: DynamicsFeatures


def segment_sleep_bouts(msd: MsdSeries) -> list[SleepBout]:
    """Quiet regions (< 0.01 g) merged across suprathreshold interruptions
    <= 2 min, retained when the merged span (quiet plus interruptions)
    reaches 2 h."""
    fs = msd.sample_rate_hz
    runs = boolean_runs(msd.values < SLEEP_MSD_THRESHOLD_G)
    max_gap = int(round(SLEEP_MAX_INTERRUPT_S * fs))
    min_span = int(round(SLEEP_MIN_BOUT_S * fs))
    bouts = []
    for group in group_runs(runs, max_gap):
        start, end = group[0][0], group[-1][1]
        if end - start >= min_span:
            bouts.append(SleepBout(start, end))
    return bouts


def detect_sleep_movements(bout: SleepBout, msd: MsdSeries) -> list[tuple[int, int]]:
    """Maximal runs above 0.05 g lasting >= 10 s within the bout."""
    fs = msd.sample_rate_hz
    min_len = int(round(MOVEMENT_MIN_S * fs))
    window = msd.values[bout.start_idx : bout.end_idx]
    segments = []
    for s, e in boolean_runs(window > MOVEMENT_MSD_THRESHOLD_G):
        if e - s >= min_len:
            segments.append((bout.start_idx + s, bout.start_idx + e))
    return segments


def _duration_bin(value: float, delimiters: Sequence[float]) -> int:
    # Right-closed bins: value <= delimiters[0] lands in bin 0, etc.
    return int(np.searchsorted(delimiters, value, side="left"))


def fragmentation_features(
    bouts: Sequence[SleepBout], sample_rate_hz: float
) -> FragmentationFeatures:
    """Probability distributions of quiet-interval and movement durations.

    Quiet intervals are the gaps between consecutive movement segments of a
    bout plus the leading and trailing gaps (a bout without movements is one
    interval spanning the bout); zero-length boundary gaps are not
    intervals.  Each histogram is normalized to sum to one, or left all
    zero when it has no counts.
    """
    sleep_counts = np.zeros(5)
    move_counts = np.zeros(5)
    for bout in bouts:
        edges = [bout.start_idx]
        for s, e in sorted(bout.movement_segments):
            edges.extend([s, e])
            move_counts[_duration_bin((e - s) / sample_rate_hz, MOVE_DUR_DELIMITERS_S)] += 1
        edges.append(bout.end_idx)
        for gap_start, gap_end in zip(edges[::2], edges[1::2]):
            gap_min = (gap_end - gap_start) / sample_rate_hz / 60.0
            if gap_min > 0:
                sleep_counts[_duration_bin(gap_min, SLEEP_DUR_DELIMITERS_MIN)] += 1
    if sleep_counts.sum() > 0:
        sleep_counts = sleep_counts / sleep_counts.sum()
    if move_counts.sum() > 0:
        move_counts = move_counts / move_counts.sum()
    return FragmentationFeatures(sleep_counts, move_counts)


def sleep_movement_features(
    frame: np.ndarray, start_idx: int = 0
) -> Optional[SleepMovementFrame]:
    """Features of one 5 s movement frame, or None when the frame MSD is
    <= 0.005 g or the frame is degenerate for dynamics."""
    f = np.asarray(frame, dtype=np.float64)
    msd_g = float(np.linalg.norm(f, axis=1).std())
    if msd_g <= MOVEMENT_FRAME_MIN_MSD_G:
        return None
    try:
        intensity = raw_intensity(f)
        dyn = frame_dynamics(f)
    except _FRAME_SKIP_ERRORS:
        return None
    med = np.median(f, axis=0)
    return SleepMovementFrame(
        start_idx=start_idx,
        msd_g=intensity.msd_g,
        pl=intensity.pl_raw,
        mad=intensity.mad_raw,
        median_x=float(med[0]),
        median_y=float(med[1]),
        median_z=float(med[2]),
        dynamics=dyn,
    )


def extract_sleep_data(
    recording: TriaxialRecording, msd: MsdSeries | None = None
) -> tuple[list[SleepBout], list[SleepMovementFrame]]:
    """Sleep bouts (with movement segments attached) and qualifying movement
    frames for one recording.

    Movement segments are tiled into contiguous 5 s frames from the segment
    start; the trailing remainder is discarded, mirroring gait.
    """
    fs = recording.sample_rate_hz
    if msd is None:
        msd = rolling_msd(magnitude(recording))
    bouts = segment_sleep_bouts(msd)
    xyz = recording.xyz
    flen = int(round(FRAME_DURATION_S * fs))
    frames: list[SleepMovementFrame] = []
    for bout in bouts:
        bout.movement_segments = detect_sleep_movements(bout, msd)
        for seg_start, seg_end in bout.movement_segments:
            for start in range(seg_start, seg_end - flen + 1, flen):
                feat = sleep_movement_features(xyz[start : start + flen], start)
                if feat is not None:
                    frames.append(feat)
    return bouts, frames


def sleep_summary(
    frames: Sequence[SleepMovementFrame],
    bouts: Sequence[SleepBout],
    sample_rate_hz: float,
) -> dict[str, float]:
    """206-dimensional per-subject sleep summary in canonical column order.

    Raises ``InsufficientFrames`` with fewer than two qualifying frames.
    """
    if len(frames) < 2:
        raise InsufficientFrames(f"{len(frames)} sleep movement frames, need >= 2")
    out: dict[str, float] = {}

    frag = fragmentation_features(bouts, sample_rate_hz)
    for k in range(5):
        out[f"sleep_dur_prob_{k + 1}"] = float(frag.sleep_dur_prob[k])
    for k in range(5):
        out[f"sleep_move_dur_prob_{k + 1}"] = float(frag.move_dur_prob[k])

    def put_mean_std(name: str, values: np.ndarray) -> None:
        out[f"sleep_{name}_mean"] = float(np.mean(values))
        out[f"sleep_{name}_std"] = float(np.std(values))

    put_mean_std("accel_msd", np.array([f.msd_g for f in frames]))
    put_mean_std("accel_pl", np.array([f.pl for f in frames]))
    put_mean_std("accel_mad", np.array([f.mad for f in frames]))
    put_mean_std("median_x", np.array([f.median_x for f in frames]))
    put_mean_std("median_y", np.array([f.median_y for f in frames]))
    put_mean_std("median_z", np.array([f.median_z for f in frames]))

    put_mean_std("dyn_pl", np.array([f.dynamics.pl_z for f in frames]))
    put_mean_std("dyn_mad", np.array([f.dynamics.mad3_z for f in frames]))
    pair_block = np.stack([f.dynamics.mad_pair for f in frames])
    for k, pair in enumerate(AXIS_PAIRS):
        put_mean_std(f"dyn_mad_{pair}", pair_block[:, k])
    tde = np.stack([f.dynamics.tde_eig for f in frames])
    tde_mean = tde.mean(axis=0)
    tde_std = tde.std(axis=0)
    for stat, block in (("mean", tde_mean), ("std", tde_std)):
        for s in range(4):
            for r in range(21):
                out[f"sleep_tde_scale{s + 1}_eig{r + 1:02d}_{stat}"] = float(
                    block[s, r]
                )

    assert list(out) == SLEEP_FEATURE_NAMES
    return out
