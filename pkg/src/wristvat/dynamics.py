"""Movement-dynamics features on 5 s frames.

Raw-acceleration intensity (MSD, path length, mean absolute distance) plus
the magnitude-free dynamics block computed on z-scored frames: path length,
trimmed MAD in 3-d and in six 2-d axis pairs, and time-delay-embedding (TDE)
correlation eigenspectra at four delay scales.

TDE construction: for each axis and each of 7 delays k = 0..6, take the
axis shifted later by k * spacing over the common overlap support of length
n - 6 * spacing, giving 21 channels.  The eigenvalues of their 21 x 21
Pearson correlation matrix sum to 21 (the trace), are clamped at zero, and
are returned sorted descending.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import (
    AllPointsTrimmed,
    FrameTooShort,
    FrameTooShortForScale,
    ZeroVarianceChannel,
)
from .features import AXIS_PAIRS
from .sigproc import zscore_frame

TDE_SPACINGS = (3, 7, 15, 31)
TDE_N_DELAYS = 7
TDE_N_CHANNELS = 3 * TDE_N_DELAYS

MAD_TRIM_SIGMA_3D = 4.0
MAD_TRIM_SIGMA_PAIR = 2.0

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class DynamicsFeatures:
    """Per-frame dynamics block: 2 + 6 + 4*21 values."""

    pl_z: float
    mad3_z: float
    mad_pair: np.ndarray  # (6,) in AXIS_PAIRS order
    tde_eig: np.ndarray  # (4, 21), each scale sorted descending


@dataclass(frozen=True)
class RawIntensityFeatures:
    msd_g: float
    pl_raw: float
    mad_raw: float


def _as_frame(frame: np.ndarray, min_len: int = 2) -> np.ndarray:
    f = np.asarray(frame, dtype=np.float64)
    if f.ndim != 2 or f.shape[1] != 3:
        raise ValueError("frame must be an (n, 3) array")
    if f.shape[0] < min_len:
        raise FrameTooShort(f"frame has {f.shape[0]} samples, need {min_len}")
    return f


def path_length(frame: np.ndarray) -> float:
    """Summed Euclidean distance between successive 3-d samples."""
    f = _as_frame(frame)
    return float(np.linalg.norm(np.diff(f, axis=0), axis=1).sum())


def _trim_outliers(points: np.ndarray, trim_sigma: float) -> np.ndarray:
    # Single pass: centroid and scale computed once, points beyond
    # trim_sigma * sigma removed once.  sigma is the per-axis-pooled std of
    # centroid distances, i.e. sqrt(sum of per-axis population variances).
    d = np.linalg.norm(points - points.mean(axis=0), axis=1)
    sigma = np.sqrt(np.mean(d * d))
    return points[d <= trim_sigma * sigma]


def mad_3d(frame: np.ndarray, trim_sigma: float = MAD_TRIM_SIGMA_3D) -> float:
    """Mean pairwise 3-d distance after centroid-distance outlier trimming."""
    pts = _trim_outliers(_as_frame(frame), trim_sigma)
    if pts.shape[0] < 2:
        raise AllPointsTrimmed("fewer than two points left after trimming")
    return float(pdist(pts).mean())


def mad_axis_pair(
    frame: np.ndarray, pair: str, trim_sigma: float = MAD_TRIM_SIGMA_PAIR
) -> float:
    """Mean pairwise distance within a 2-d axis pair (xx, xy, ..., zz).

    A repeated axis ("xx") forms degenerate diagonal points (a_t, a_t), so
    its MAD is sqrt(2) times the 1-d mean absolute difference.
    """
    if pair not in AXIS_PAIRS:
        raise ValueError(f"pair must be one of {AXIS_PAIRS}")
    f = _as_frame(frame)
    cols = [_AXIS_INDEX[pair[0]], _AXIS_INDEX[pair[1]]]
    pts = _trim_outliers(f[:, cols], trim_sigma)
    if pts.shape[0] < 2:
        raise AllPointsTrimmed("fewer than two points left after trimming")
    return float(pdist(pts).mean())


def tde_eigenspectrum(
    frame_z: np.ndarray, spacing_samples: int, n_delays: int = TDE_N_DELAYS
) -> np.ndarray:
    """Descending eigenvalues of the 21 x 21 TDE channel correlation matrix.

    ``frame_z`` is expected to be z-scored; the spectrum itself is invariant
    to per-axis affine rescaling because channels are re-standardized by the
    Pearson correlation.  Eigenvalues are clamped at zero.

    Raises ``FrameTooShortForScale`` when the overlap support
    n - (n_delays - 1) * spacing is below the channel count, and
    ``ZeroVarianceChannel`` when any delayed channel is constant.
    """
    f = _as_frame(frame_z)
    n = f.shape[0]
    n_channels = 3 * n_delays
    support = n - (n_delays - 1) * spacing_samples
    if support < n_channels:
        raise FrameTooShortForScale(
            f"{n} samples leave {support} overlap at spacing {spacing_samples}"
        )
    channels = np.empty((n_channels, support))
    row = 0
    for axis in range(3):
        col = f[:, axis]
        for k in range(n_delays):
            channels[row] = col[k * spacing_samples : k * spacing_samples + support]
            row += 1
    sd = channels.std(axis=1)
    if np.any(sd <= 1e-12 * np.maximum(1.0, np.abs(channels.mean(axis=1)))):
        raise ZeroVarianceChannel("constant delay-embedded channel")
    corr = np.corrcoef(channels)
    evals = np.linalg.eigvalsh(corr)[::-1]
    return np.clip(evals, 0.0, None)


def frame_dynamics(frame: np.ndarray) -> DynamicsFeatures:
    """Full dynamics block of a frame: z-score, PL, MADs, TDE eigenspectra."""
    z = zscore_frame(frame)
    pairs = np.array([mad_axis_pair(z, p) for p in AXIS_PAIRS])
    tde = np.stack([tde_eigenspectrum(z, s) for s in TDE_SPACINGS])
    return DynamicsFeatures(path_length(z), mad_3d(z), pairs, tde)


def raw_intensity(frame: np.ndarray) -> RawIntensityFeatures:
    """Movement-intensity features on the raw (non-z-scored) frame."""
    f = _as_frame(frame)
    msd = float(np.linalg.norm(f, axis=1).std())
    return RawIntensityFeatures(msd, path_length(f), mad_3d(f))
