"""Synthetic accelerometry generators with known ground truth, plus the
independent brute-force oracles used by the test and acceptance suites.

``gen_walk`` puts a sinusoidal arm-swing fundamental on the y axis with
half-amplitude second harmonics on x and z, a 1 g gravity offset, and white
Gaussian noise, so the first principal component carries the step period
and the TDE spectra have nontrivial structure.  ``gen_sleep`` produces a
quiet noise floor with scheduled movement bursts: a sinusoidal wiggle on
the gravity axis (magnitude MSD ~ amplitude / sqrt(2)) plus smaller x/y
wiggles.  Both are deterministic for a fixed (spec, seed).

The oracles are deliberately unoptimized, independent re-statements of the
trimmed MAD, Spearman, and ridge definitions used to cross-check the
production implementations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ingest import TriaxialRecording

DEFAULT_SAMPLE_RATE_HZ = 80.0
MOVEMENT_WIGGLE_HZ = 1.5


@dataclass(frozen=True)
class WalkSpec:
    """Parameters of a synthetic continuous walk."""

    duration_s: float = 600.0
    step_period_s: float = 0.79
    swing_amplitude_g: float = 0.4
    noise_std_g: float = 0.02
    gravity_axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ

    def __post_init__(self) -> None:
        if not 0.35 <= self.step_period_s <= 0.85:
            raise ValueError("step_period_s must lie in [0.35, 0.85]")
        if self.duration_s <= 0 or self.swing_amplitude_g < 0:
            raise ValueError("invalid walk spec")


@dataclass(frozen=True)
class SleepSpec:
    """Quiet baseline with scheduled movement bursts (onset_s, duration_s,
    amplitude_g); movements must be disjoint and inside the recording."""

    duration_s: float = 7800.0
    movement_schedule: tuple[tuple[float, float, float], ...] = ()
    baseline_noise_g: float = 0.002
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ

    def __post_init__(self) -> None:
        if not 0 <= self.baseline_noise_g < 0.01:
            raise ValueError("baseline_noise_g must be < 0.01")
        last_end = 0.0
        for onset, dur, amp in sorted(self.movement_schedule):
            if onset < last_end or dur <= 0 or amp < 0:
                raise ValueError("movements must be disjoint with positive length")
            if onset + dur > self.duration_s:
                raise ValueError("movement extends past the recording end")
            last_end = onset + dur


def gen_walk(spec: WalkSpec, seed: int, subject_id: str = "synth") -> TriaxialRecording:
    """Synthesize a continuous walk; deterministic per (spec, seed)."""
    rng = np.random.default_rng(seed)
    fs = spec.sample_rate_hz
    n = int(round(spec.duration_s * fs))
    t = np.arange(n) / fs
    omega = 2.0 * math.pi / spec.step_period_s
    phases = rng.uniform(0.0, 2.0 * math.pi, size=3)
    amp = spec.swing_amplitude_g
    x = 0.5 * amp * np.sin(2.0 * omega * t + phases[0])
    y = amp * np.sin(omega * t + phases[1])
    z = 0.5 * amp * np.sin(2.0 * omega * t + phases[2])
    signal = np.column_stack([x, y, z])
    signal += np.asarray(spec.gravity_axis, dtype=np.float64)
    if spec.noise_std_g > 0:
        signal += rng.normal(0.0, spec.noise_std_g, size=(n, 3))
    return TriaxialRecording(
        subject_id, fs, 0.0, signal[:, 0], signal[:, 1], signal[:, 2]
    )


def gen_sleep(spec: SleepSpec, seed: int, subject_id: str = "synth") -> TriaxialRecording:
    """Synthesize a sleep recording with scheduled movement bursts."""
    rng = np.random.default_rng(seed)
    fs = spec.sample_rate_hz
    n = int(round(spec.duration_s * fs))
    t = np.arange(n) / fs
    signal = rng.normal(0.0, spec.baseline_noise_g, size=(n, 3))
    signal[:, 2] += 1.0  # resting wrist: gravity on z
    for onset, dur, amp in spec.movement_schedule:
        i0 = int(round(onset * fs))
        i1 = min(int(round((onset + dur) * fs)), n)
        tt = t[i0:i1]
        phase = rng.uniform(0.0, 2.0 * math.pi, size=3)
        w = 2.0 * math.pi * MOVEMENT_WIGGLE_HZ
        signal[i0:i1, 2] += amp * np.sin(w * tt + phase[2])
        signal[i0:i1, 0] += 0.25 * amp * np.sin(w * tt + phase[0])
        signal[i0:i1, 1] += 0.25 * amp * np.sin(w * tt + phase[1])
    return TriaxialRecording(
        subject_id, fs, 0.0, signal[:, 0], signal[:, 1], signal[:, 2]
    )


# ---------------------------------------------------------------------------
# Brute-force oracles (independent definitions; keep loops, avoid shortcuts)
# ---------------------------------------------------------------------------


def oracle_mad(points: np.ndarray, trim_sigma: float) -> float:
    """Trimmed mean pairwise distance by direct loops (any dimensionality)."""
    pts = [list(map(float, p)) for p in np.atleast_2d(points)]
    n = len(pts)
    dim = len(pts[0])
    centroid = [sum(p[d] for p in pts) / n for d in range(dim)]
    dists = [
        math.sqrt(sum((p[d] - centroid[d]) ** 2 for d in range(dim))) for p in pts
    ]
    sigma = math.sqrt(sum(d * d for d in dists) / n)
    kept = [p for p, d in zip(pts, dists) if d <= trim_sigma * sigma]
    if len(kept) < 2:
        raise ValueError("oracle: all points trimmed")
    total = 0.0
    count = 0
    for i in range(len(kept)):
        for j in range(i + 1, len(kept)):
            total += math.sqrt(
                sum((kept[i][d] - kept[j][d]) ** 2 for d in range(dim))
            )
            count += 1
    return total / count


def _oracle_ranks(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def oracle_spearman(a, b) -> float:
    """Spearman correlation via an explicit rank table and Pearson sums."""
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    if len(a) != len(b) or len(a) < 2:
        raise ValueError("oracle: bad input lengths")
    ra, rb = _oracle_ranks(a), _oracle_ranks(b)
    n = len(a)
    ma = sum(ra) / n
    mb = sum(rb) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(ra, rb))
    va = sum((x - ma) ** 2 for x in ra)
    vb = sum((y - mb) ** 2 for y in rb)
    if va <= 0 or vb <= 0:
        raise ValueError("oracle: constant input")
    return cov / math.sqrt(va * vb)


def oracle_ridge(
    X: np.ndarray,
    y: np.ndarray,
    ridge_lambda: float,
    lambda_scaling: str = "n",
) -> tuple[np.ndarray, float]:
    """Ridge weights and intercept via explicit matrix inversion.

    Mirrors the production semantics (population-std standardization,
    centered target, lambda optionally scaled by n) but solves with
    ``np.linalg.inv`` on the normal equations.  Raises for zero-variance
    columns (the oracle handles small dense full-variance systems only).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    if np.any(stds <= 0):
        raise ValueError("oracle: zero-variance column")
    Z = (X - means) / stds
    penalty = ridge_lambda * n if lambda_scaling == "n" else ridge_lambda
    A = Z.T @ Z + penalty * np.eye(p)
    w = np.linalg.inv(A) @ (Z.T @ (y - y.mean()))
    return w, float(y.mean())
