import numpy as np
import pytest

from wristvat.dynamics import (
    TDE_SPACINGS,
    frame_dynamics,
    mad_3d,
    mad_axis_pair,
    path_length,
    raw_intensity,
    tde_eigenspectrum,
)
from wristvat.errors import (
    FrameTooShort,
    FrameTooShortForScale,
    ZeroVarianceChannel,
)
from wristvat.features import AXIS_PAIRS
from wristvat.sigproc import zscore_frame
from wristvat.synth import oracle_mad

from conftest import random_frame, sinusoid_frame


class TestPathLength:
    def test_constant_frame(self):
        assert path_length(np.ones((50, 3))) == 0.0

    def test_two_points(self):
        assert path_length(np.array([[0.0, 0, 0], [1.0, 0, 0]])) == 1.0

    def test_matches_loop_oracle(self):
        f = random_frame(0, n=200)
        total = 0.0
        for i in range(199):
            total += np.sqrt(((f[i + 1] - f[i]) ** 2).sum())
        assert path_length(f) == pytest.approx(total, abs=1e-12)

    def test_too_short(self):
        with pytest.raises(FrameTooShort):
            path_length(np.ones((1, 3)))


class TestMad3d:
    def test_two_points_distance(self):
        f = np.array([[0.0, 0, 0], [3.0, 4.0, 0.0]])
        assert mad_3d(f) == pytest.approx(5.0)

    def test_matches_brute_force(self):
        for seed in range(5):
            f = random_frame(seed, n=400)
            assert mad_3d(f) == pytest.approx(oracle_mad(f, 4.0), abs=1e-12)

    def test_outlier_trimmed(self):
        rng = np.random.default_rng(7)
        f = rng.normal(0, 0.1, (80, 3))
        f[11] = (30.0, -30.0, 30.0)  # way past 4 sigma of centroid distances
        without = np.delete(f, 11, axis=0)
        assert mad_3d(f, 4.0) == pytest.approx(mad_3d(without, np.inf), abs=1e-12)


class TestMadAxisPair:
    def test_xx_is_sqrt2_of_1d(self):
        f = random_frame(1, n=120)
        x = f[:, 0]
        # The 2-d trim criterion reduces to |x - mean| <= 2 std in 1-d.
        mu, sd = x.mean(), x.std()
        kept = x[np.abs(x - mu) <= 2 * sd]
        diffs = np.abs(kept[:, None] - kept[None, :])
        mad1 = diffs[np.triu_indices(len(kept), 1)].mean()
        assert mad_axis_pair(f, "xx") == pytest.approx(np.sqrt(2) * mad1, abs=1e-12)

    def test_matches_brute_force(self):
        idx = {"x": 0, "y": 1, "z": 2}
        for seed in range(3):
            f = random_frame(seed + 10, n=300)
            for pair in AXIS_PAIRS:
                pts = f[:, [idx[pair[0]], idx[pair[1]]]]
                assert mad_axis_pair(f, pair) == pytest.approx(
                    oracle_mad(pts, 2.0), abs=1e-12
                )

    def test_constant_frame_is_zero(self):
        assert mad_axis_pair(np.ones((30, 3)), "xy") == 0.0

    def test_bad_pair_name(self):
        with pytest.raises(ValueError):
            mad_axis_pair(random_frame(0, 10), "yx")


class TestTdeEigenspectrum:
    def test_trace_identity_and_clamping(self):
        for seed in range(20):
            z = zscore_frame(random_frame(seed, n=400))
            for spacing in TDE_SPACINGS:
                ev = tde_eigenspectrum(z, spacing)
                assert ev.shape == (21,)
                assert ev.sum() == pytest.approx(21.0, abs=1e-6)
                assert ev.min() >= 0.0
                assert np.all(np.diff(ev) <= 1e-12)  # sorted descending

    def test_white_noise_concentrates_near_one(self):
        # Sample-correlation spread for 21 channels over <=382 samples keeps
        # every eigenvalue well inside (0.25, 2.2); measured extremes over
        # 300 frames were [0.36, 1.99].
        rng = np.random.default_rng(0)
        for _ in range(40):
            z = zscore_frame(rng.normal(0, 1, (400, 3)))
            for spacing in TDE_SPACINGS:
                ev = tde_eigenspectrum(z, spacing)
                assert 0.25 < ev.min() and ev.max() < 2.2

    def test_shared_sinusoid_is_rank_two(self):
        t = np.arange(400) / 80.0
        s = np.sin(2 * np.pi * 1.9 * t + 0.3)
        z = zscore_frame(np.column_stack([s, s, s]))
        for spacing in TDE_SPACINGS:
            ev = tde_eigenspectrum(z, spacing)
            assert ev[:2].sum() == pytest.approx(21.0, abs=1e-6)
            assert ev[2:].max() < 1e-9

    def test_time_reversal_invariance(self):
        z = zscore_frame(sinusoid_frame(0.7, noise=0.05, seed=3))
        for spacing in TDE_SPACINGS:
            fwd = tde_eigenspectrum(z, spacing)
            rev = tde_eigenspectrum(z[::-1], spacing)
            assert np.abs(fwd - rev).max() < 1e-9

    def test_frame_too_short_for_scale(self):
        z = zscore_frame(random_frame(0, n=150))  # 150 - 186 < 21 at spacing 31
        with pytest.raises(FrameTooShortForScale):
            tde_eigenspectrum(z, 31)

    def test_zero_variance_channel(self):
        f = random_frame(1, n=400)
        f[:, 0] = 0.0  # tde takes the frame as given; no internal z-score
        with pytest.raises(ZeroVarianceChannel):
            tde_eigenspectrum(f, 3)


class TestFrameDynamics:
    def test_affine_invariance(self):
        f = sinusoid_frame(0.65, noise=0.03, seed=9)
        g = f * np.array([3.0, 0.2, 7.0]) + np.array([-1.0, 2.0, 0.5])
        a = frame_dynamics(f)
        b = frame_dynamics(g)
        assert a.pl_z == pytest.approx(b.pl_z, abs=1e-9)
        assert a.mad3_z == pytest.approx(b.mad3_z, abs=1e-9)
        np.testing.assert_allclose(a.mad_pair, b.mad_pair, atol=1e-9)
        np.testing.assert_allclose(a.tde_eig, b.tde_eig, atol=1e-9)

    def test_field_shapes(self):
        dyn = frame_dynamics(random_frame(4))
        assert dyn.mad_pair.shape == (6,)
        assert dyn.tde_eig.shape == (4, 21)


class TestRawIntensity:
    def test_constant_frame(self):
        out = raw_intensity(np.full((50, 3), 0.4))
        assert out.msd_g == pytest.approx(0.0, abs=1e-12)
        assert out.pl_raw == 0.0
        assert out.mad_raw == 0.0

    def test_homogeneity(self):
        f = random_frame(6, n=200)
        a = raw_intensity(f)
        b = raw_intensity(3.0 * f)
        assert b.msd_g == pytest.approx(3 * a.msd_g, rel=1e-12)
        assert b.pl_raw == pytest.approx(3 * a.pl_raw, rel=1e-12)
        assert b.mad_raw == pytest.approx(3 * a.mad_raw, rel=1e-12)

    def test_matches_constituents(self):
        f = random_frame(7, n=150)
        out = raw_intensity(f)
        assert out.msd_g == pytest.approx(np.linalg.norm(f, axis=1).std(), abs=1e-12)
        assert out.pl_raw == pytest.approx(path_length(f), abs=1e-12)
        assert out.mad_raw == pytest.approx(mad_3d(f, 4.0), abs=1e-12)
