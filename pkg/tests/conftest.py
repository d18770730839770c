"""Shared test helpers."""

import numpy as np
import pytest

from wristvat.dynamics import DynamicsFeatures
from wristvat.gait import GaitFrame
from wristvat.sigproc import MsdSeries

FS = 80.0
FRAME_LEN = 400  # 5 s at 80 Hz


def sinusoid_frame(period_s: float, n: int = FRAME_LEN, fs: float = FS,
                   noise: float = 0.0, seed: int = 0) -> np.ndarray:
    """Walk-like frame: fundamental on y, second harmonics on x/z, gravity on z."""
    rng = np.random.default_rng(seed)
    t = np.arange(n) / fs
    w = 2 * np.pi / period_s
    x = 0.2 * np.sin(2 * w * t + 0.3)
    y = 0.4 * np.sin(w * t + 1.1)
    z = 1.0 + 0.2 * np.sin(2 * w * t + 2.2)
    frame = np.column_stack([x, y, z])
    if noise > 0:
        frame = frame + rng.normal(0, noise, frame.shape)
    return frame


def random_frame(seed: int, n: int = FRAME_LEN, scale: float = 1.0) -> np.ndarray:
    return np.random.default_rng(seed).normal(0, scale, (n, 3))


def random_rotation(seed: int) -> np.ndarray:
    """Uniform-ish random 3-d rotation via QR with positive determinant."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def msd_series(values, fs: float = FS) -> MsdSeries:
    return MsdSeries(np.asarray(values, dtype=float), fs)


def const_msd(duration_s: float, level: float, fs: float = FS) -> np.ndarray:
    return np.full(int(round(duration_s * fs)), level)


@pytest.fixture
def dummy_dynamics() -> DynamicsFeatures:
    return DynamicsFeatures(
        pl_z=1.0,
        mad3_z=0.5,
        mad_pair=np.full(6, 0.3),
        tde_eig=np.full((4, 21), 1.0),
    )


def make_gait_frame(bout_id: int, start_idx: int, level: int,
                    dyn: DynamicsFeatures, n_samples: int = FRAME_LEN,
                    msd_g: float = 0.2) -> GaitFrame:
    return GaitFrame(
        bout_id=bout_id,
        start_idx=start_idx,
        n_samples=n_samples,
        step_duration1_s=0.7,
        step_duration2_s=0.7,
        step_periodicity=0.8,
        msd_g=msd_g,
        pl=1.0,
        mad=0.5,
        intensity_level=level,
        dynamics=dyn,
    )
