"""Gait bout segmentation, 5 s gait-frame detection, and the 214-feature
per-subject gait summary.

Pipeline: the rolling MSD segments gait bouts (suprathreshold regions above
0.1 g merged across gaps of 15 s or less, retained when they accumulate at
least 10 s of suprathreshold time).  Bouts are tiled into contiguous 5 s
frames (trailing remainder discarded); a frame becomes a gait frame when the
autocorrelation of its first principal component has a qualifying peak in
the 0.35-1.70 s lag range.  Frame features are then aggregated per subject
as means and population stds, plus the 4x4 intensity transition block,
frame count, and frame MSD sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dynamics import DynamicsFeatures, frame_dynamics, raw_intensity
from .errors import (
    AllPointsTrimmed,
    DegenerateFrame,
    FrameTooShortForScale,
    InsufficientFrames,
    SeriesTooShort,
    ZeroVariance,
    ZeroVarianceAxis,
    ZeroVarianceChannel,
)
from .features import AXIS_PAIRS, GAIT_FEATURE_NAMES
from .ingest import TriaxialRecording
from .sigproc import (
    MsdSeries,
    autocorrelation,
    boolean_runs,
    find_acf_peaks,
    first_principal_component,
    group_runs,
    magnitude,
    rolling_msd,
)

GAIT_MSD_THRESHOLD_G = 0.1
GAIT_MAX_GAP_S = 15.0
GAIT_MIN_SUPRA_S = 10.0
FRAME_DURATION_S = 5.0
STEP_LAG_RANGE_S = (0.35, 1.70)
STEP_DURATION2_MAX_S = 0.85
# MSD bin upper edges for very-slow / slow / moderate-fast walking; above
# the last edge is running.
INTENSITY_BIN_EDGES_G = (0.125, 0.375, 1.0)

_FRAME_SKIP_ERRORS = (
    DegenerateFrame,
    ZeroVariance,
    ZeroVarianceAxis,
    ZeroVarianceChannel,
    FrameTooShortForScale,
    AllPointsTrimmed,
)


@dataclass(frozen=True)
class Bout:
    """Contiguous sample interval classified as gait or sleep (end exclusive)."""

    start_idx: int
    end_idx: int
    kind: str = "gait"


@dataclass(frozen=True)
class GaitFrame:
    """One detected 5 s gait frame and its frame-level features."""

    bout_id: int
    start_idx: int
    n_samples: int
    step_duration1_s: float
    step_duration2_s: float
    step_periodicity: float
    msd_g: float
    pl: float
    mad: float
    intensity_level: int
    dynamics: DynamicsFeatures


def segment_gait_bouts(msd: MsdSeries) -> list[Bout]:
    """Suprathreshold (> 0.1 g) regions merged across gaps <= 15 s, retained
    when cumulative suprathreshold time within the merged bout is >= 10 s.

    Gap time is merged into the bout span but does not count toward the
    10 s minimum.
    """
    fs = msd.sample_rate_hz
    runs = boolean_runs(msd.values > GAIT_MSD_THRESHOLD_G)
    max_gap = int(round(GAIT_MAX_GAP_S * fs))
    min_supra = int(round(GAIT_MIN_SUPRA_S * fs))
    bouts = []
    for group in group_runs(runs, max_gap):
        covered = sum(e - s for s, e in group)
        if covered >= min_supra:
            bouts.append(Bout(group[0][0], group[-1][1], "gait"))
    return bouts


def detect_gait_frame(
    frame: np.ndarray, sample_rate_hz: float
) -> Optional[tuple[float, float, float]]:
    """Periodicity test on one 5 s frame.

    Returns (step_duration1_s, step_duration2_s, step_periodicity) from the
    highest qualifying autocorrelation peak of the frame's first principal
    component, or None when no peak passes.  step_duration2 halves the lag
    when it exceeds 0.85 s (stride rather than step periodicity).
    """
    try:
        pc1 = first_principal_component(frame)
        acf = autocorrelation(pc1, STEP_LAG_RANGE_S[1], sample_rate_hz)
    except (DegenerateFrame, ZeroVariance):
        return None
    peaks = find_acf_peaks(acf, sample_rate_hz, STEP_LAG_RANGE_S)
    if not peaks:
        return None
    best = peaks[0]
    sd1 = best.lag_s
    sd2 = sd1 / 2.0 if sd1 > STEP_DURATION2_MAX_S else sd1
    return sd1, sd2, best.height


def intensity_bin(msd_g: float) -> int:
    """Gait intensity level 1..4 from the frame MSD (bin edges inclusive)."""
    for level, edge in enumerate(INTENSITY_BIN_EDGES_G, start=1):
        if msd_g <= edge:
            return level
    return 4


def extract_gait_frames(
    recording: TriaxialRecording,
    msd: MsdSeries | None = None,
    bout_id_offset: int = 0,
) -> list[GaitFrame]:
    """All detected gait frames of one recording, in chronological order.

    Frames whose features cannot be computed (degenerate variance within a
    frame) are skipped; nothing is imputed.  ``bout_id_offset`` keeps bout
    ids unique when pooling frames across several recordings.
    """
    fs = recording.sample_rate_hz
    if msd is None:
        msd = rolling_msd(magnitude(recording))
    xyz = recording.xyz
    flen = int(round(FRAME_DURATION_S * fs))
    frames: list[GaitFrame] = []
    for b_id, bout in enumerate(segment_gait_bouts(msd), start=bout_id_offset):
        for start in range(bout.start_idx, bout.end_idx - flen + 1, flen):
            frame = xyz[start : start + flen]
            try:
                detected = detect_gait_frame(frame, fs)
            except SeriesTooShort:
                break  # frame shorter than the lag range: rate too low
            if detected is None:
                continue
            sd1, sd2, periodicity = detected
            try:
                intensity = raw_intensity(frame)
                dyn = frame_dynamics(frame)
            except _FRAME_SKIP_ERRORS:
                continue
            frames.append(
                GaitFrame(
                    bout_id=b_id,
                    start_idx=start,
                    n_samples=flen,
                    step_duration1_s=sd1,
                    step_duration2_s=sd2,
                    step_periodicity=periodicity,
                    msd_g=intensity.msd_g,
                    pl=intensity.pl_raw,
                    mad=intensity.mad_raw,
                    intensity_level=intensity_bin(intensity.msd_g),
                    dynamics=dyn,
                )
            )
    return frames


def transition_matrix(frames: Sequence[GaitFrame]) -> np.ndarray:
    """4x4 joint probability of intensity levels over successive frames.

    Only pairs of detected gait frames that are time-adjacent within the
    same bout count; the matrix is normalized by the pair count and is all
    zero when no pairs exist.
    """
    counts = np.zeros((4, 4))
    for a, b in zip(frames, frames[1:]):
        if a.bout_id == b.bout_id and b.start_idx == a.start_idx + a.n_samples:
            counts[a.intensity_level - 1, b.intensity_level - 1] += 1.0
    total = counts.sum()
    return counts / total if total > 0 else counts


def total_gait_hours(frames: Sequence[GaitFrame]) -> float:
    """Total detected gait duration: frame count x 5 s, in hours."""
    return len(frames) * FRAME_DURATION_S / 3600.0


def gait_summary(frames: Sequence[GaitFrame]) -> dict[str, float]:
    """214-dimensional per-subject gait summary in canonical column order.

    Raises ``InsufficientFrames`` with fewer than two frames (stds would be
    degenerate for modeling).
    """
    if len(frames) < 2:
        raise InsufficientFrames(f"{len(frames)} gait frames, need >= 2")
    out: dict[str, float] = {}

    def put_mean_std(name: str, values: np.ndarray) -> None:
        out[f"gait_{name}_mean"] = float(np.mean(values))
        out[f"gait_{name}_std"] = float(np.std(values))

    put_mean_std("step_duration1", np.array([f.step_duration1_s for f in frames]))
    put_mean_std("step_duration2", np.array([f.step_duration2_s for f in frames]))
    put_mean_std("step_periodicity", np.array([f.step_periodicity for f in frames]))
    msd = np.array([f.msd_g for f in frames])
    put_mean_std("accel_msd", msd)
    put_mean_std("accel_pl", np.array([f.pl for f in frames]))
    put_mean_std("accel_mad", np.array([f.mad for f in frames]))

    trans = transition_matrix(frames)
    for i in range(4):
        for j in range(4):
            out[f"gait_intensity_trans_{i + 1}_{j + 1}"] = float(trans[i, j])
    out["gait_frame_count"] = float(len(frames))
    out["gait_frame_msd_sum"] = float(msd.sum())

    put_mean_std("dyn_pl", np.array([f.dynamics.pl_z for f in frames]))
    put_mean_std("dyn_mad", np.array([f.dynamics.mad3_z for f in frames]))
    pair_block = np.stack([f.dynamics.mad_pair for f in frames])
    for k, pair in enumerate(AXIS_PAIRS):
        put_mean_std(f"dyn_mad_{pair}", pair_block[:, k])
    tde = np.stack([f.dynamics.tde_eig for f in frames])  # (n, 4, 21)
    tde_mean = tde.mean(axis=0)
    tde_std = tde.std(axis=0)
    for stat, block in (("mean", tde_mean), ("std", tde_std)):
        for s in range(4):
            for r in range(21):
                out[f"gait_tde_scale{s + 1}_eig{r + 1:02d}_{stat}"] = float(
                    block[s, r]
                )

    assert list(out) == GAIT_FEATURE_NAMES
    return out
