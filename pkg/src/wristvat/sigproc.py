"""Core signal primitives shared by gait and sleep analysis.

Everything here is a pure function on immutable inputs: acceleration
magnitude, rolling magnitude standard deviation (MSD), per-frame z-scoring,
first principal component, autocorrelation, and autocorrelation peak
finding.  Conventions that the rest of the pipeline depends on:

* standard deviations are population (ddof=0) throughout;
* the autocorrelation estimator is biased (lag-k sum divided by N and the
  series variance), so acf(0) == 1 and peak heights carry a 1 - k/N factor;
* peaks are strict local maxima, plateaus resolve to their leftmost index,
  and prominence is measured against the higher of the two minima
  separating the peak from strictly higher terrain inside the searched
  lag range.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import (
    DegenerateFrame,
    SeriesTooShort,
    WindowTooShort,
    ZeroVariance,
    ZeroVarianceAxis,
)

if TYPE_CHECKING:  # pragma: no cover
    from .ingest import TriaxialRecording


@dataclass(frozen=True)
class MagnitudeSeries:
    """Euclidean acceleration magnitude in g at a fixed sample rate."""

    values: np.ndarray
    sample_rate_hz: float


@dataclass(frozen=True)
class MsdSeries:
    """Rolling magnitude standard deviation, same length as its source."""

    values: np.ndarray
    sample_rate_hz: float
    window_s: float = 10.0


@dataclass(frozen=True)
class AcfPeak:
    lag_s: float
    height: float
    prominence: float


def magnitude(recording: "TriaxialRecording") -> MagnitudeSeries:
    """Elementwise Euclidean norm of the three acceleration channels."""
    m = np.sqrt(recording.x**2 + recording.y**2 + recording.z**2)
    return MagnitudeSeries(m, recording.sample_rate_hz)


def rolling_msd(mag: MagnitudeSeries, window_s: float = 10.0) -> MsdSeries:
    """Population standard deviation of the magnitude over a centered window.

    Windows are truncated at the recording edges so the output has the same
    length as the input.  Computed from cumulative sums (O(n)); the series
    is centered on its global mean first, which both guarantees translation
    invariance and avoids catastrophic cancellation on 10^7-sample inputs.

    Raises ``WindowTooShort`` if the window covers fewer than two samples.
    """
    fs = mag.sample_rate_hz
    w = int(round(window_s * fs))
    if w < 2:
        raise WindowTooShort(f"window of {window_s} s covers {w} samples at {fs} Hz")
    v = np.asarray(mag.values, dtype=np.float64)
    n = v.size
    centered = v - v.mean()
    c1 = np.concatenate(([0.0], np.cumsum(centered)))
    c2 = np.concatenate(([0.0], np.cumsum(centered * centered)))
    idx = np.arange(n)
    lo = np.maximum(idx - (w - 1) // 2, 0)
    hi = np.minimum(idx + w // 2 + 1, n)
    cnt = (hi - lo).astype(np.float64)
    mean = (c1[hi] - c1[lo]) / cnt
    var = (c2[hi] - c2[lo]) / cnt - mean * mean
    np.maximum(var, 0.0, out=var)
    return MsdSeries(np.sqrt(var), fs, window_s)


def first_principal_component(frame: np.ndarray) -> np.ndarray:
    """Project a (n, 3) frame onto its leading covariance eigenvector.

    The projection is mean-centered; its sign is fixed so the sample with
    the largest magnitude is positive.  Raises ``DegenerateFrame`` when the
    covariance is zero (constant frame).
    """
    f = np.asarray(frame, dtype=np.float64)
    if f.ndim != 2 or f.shape[1] != 3 or f.shape[0] < 2:
        raise ValueError("frame must be an (n, 3) array with n >= 2")
    centered = f - f.mean(axis=0)
    cov = centered.T @ centered / f.shape[0]
    evals, evecs = np.linalg.eigh(cov)
    # Rounding leaves ~1e-28 eigenvalues on constant frames; use a
    # scale-relative floor instead of an exact zero test.
    scale = max(1.0, float(np.abs(f).max()))
    if evals[-1] <= (1e-12 * scale) ** 2:
        raise DegenerateFrame("frame covariance is zero")
    proj = centered @ evecs[:, -1]
    if proj[np.argmax(np.abs(proj))] < 0:
        proj = -proj
    return proj


def autocorrelation(
    series: Sequence[float], max_lag_s: float, sample_rate_hz: float
) -> np.ndarray:
    """Biased autocorrelation up to ``max_lag_s``, normalized so acf(0) = 1.

    acf(k) = sum_t (x_t - mean)(x_{t+k} - mean) / (N * var), population var.

    Raises ``SeriesTooShort`` if the series does not cover the lag range and
    ``ZeroVariance`` for a constant series.
    """
    x = np.asarray(series, dtype=np.float64)
    n = x.size
    max_lag = int(np.floor(max_lag_s * sample_rate_hz + 1e-9))
    if n <= max_lag:
        raise SeriesTooShort(f"{n} samples cannot cover a {max_lag}-sample lag")
    xc = x - x.mean()
    var = float(xc @ xc) / n
    if var <= 0.0:
        raise ZeroVariance("constant series")
    r = np.correlate(xc, xc, mode="full")[n - 1 : n + max_lag]
    return r / (n * var)


def find_acf_peaks(
    acf: Sequence[float],
    sample_rate_hz: float,
    lag_range_s: tuple[float, float] = (0.35, 1.70),
    min_prominence: float = 0.2,
    min_height: float = 0.01,
) -> list[AcfPeak]:
    """Qualifying autocorrelation peaks inside the lag range, height-sorted.

    A peak is a strict local maximum (plateaus take their leftmost index;
    neighbor comparisons may look one sample outside the range).  Prominence
    is evaluated inside the searched range only: on each side the scan stops
    at the first value strictly above the peak, and the prominence is the
    peak height minus the higher of the two side minima.  A side with no
    samples in range does not constrain the prominence.

    Thresholds are strict: ``height > min_height`` and
    ``prominence > min_prominence``.
    """
    a = np.asarray(acf, dtype=np.float64)
    lo = max(int(np.ceil(lag_range_s[0] * sample_rate_hz - 1e-9)), 1)
    hi = int(np.floor(lag_range_s[1] * sample_rate_hz + 1e-9))
    if hi >= a.size:
        raise SeriesTooShort(
            f"acf has {a.size} lags but the range needs lag {hi}"
        )
    peaks: list[AcfPeak] = []
    for i in range(lo, hi + 1):
        if not a[i - 1] < a[i]:
            continue  # not rising into i, or not leftmost of its plateau
        j = i
        while j + 1 < a.size and a[j + 1] == a[i]:
            j += 1
        if j + 1 >= a.size or a[j + 1] >= a[i]:
            continue
        h = a[i]
        side_mins = []
        for rng in (range(i - 1, lo - 1, -1), range(j + 1, hi + 1)):
            m = None
            for k in rng:
                if a[k] > h:
                    break
                if m is None or a[k] < m:
                    m = float(a[k])
            if m is not None:
                side_mins.append(m)
        prominence = h - max(side_mins) if side_mins else 0.0
        if h > min_height and prominence > min_prominence:
            peaks.append(AcfPeak(i / sample_rate_hz, float(h), float(prominence)))
    peaks.sort(key=lambda p: (-p.height, p.lag_s))
    return peaks


def zscore_frame(frame: np.ndarray) -> np.ndarray:
    """Per-axis z-score (population std).  Raises ``ZeroVarianceAxis``."""
    f = np.asarray(frame, dtype=np.float64)
    mu = f.mean(axis=0)
    sd = f.std(axis=0)
    if np.any(sd <= 1e-12 * np.maximum(1.0, np.abs(mu))):
        bad = "xyz"[int(np.argmin(sd))]
        raise ZeroVarianceAxis(f"axis {bad} is constant within the frame")
    return (f - mu) / sd


def boolean_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal True runs of a boolean array as half-open (start, end) pairs."""
    m = np.asarray(mask, dtype=bool)
    if m.size == 0:
        return []
    d = np.diff(np.concatenate(([0], m.astype(np.int8), [0])))
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    return list(zip(starts.tolist(), ends.tolist()))


def group_runs(
    runs: list[tuple[int, int]], max_gap_samples: int
) -> list[list[tuple[int, int]]]:
    """Group consecutive runs whose separating gap is <= ``max_gap_samples``."""
    if not runs:
        return []
    groups: list[list[tuple[int, int]]] = [[runs[0]]]
    for run in runs[1:]:
        if run[0] - groups[-1][-1][1] <= max_gap_samples:
            groups[-1].append(run)
        else:
            groups.append([run])
    return groups
