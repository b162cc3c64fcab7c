import numpy as np
import pandas
import pytest

from sfp.errors import DimensionError, ParamError
from sfp.oracle import (CORPUS_AIRLIGHT, CORPUS_BETA, CORPUS_PALETTE,
                        DEPTH_PROFILES, apply_scattering, clean_scene,
                        dark_channel, dark_channel_baseline,
                        dc_difference_stats, depth_map, haze_pairs,
                        naive_dark_channel, radial_stats, sample_images,
                        sample_paths, synthesize_haze, synthetic_corpus,
                        transmission_mse, transmission_stats)
from sfp.pipeline import run_stats


@pytest.mark.parametrize('profile', DEPTH_PROFILES)
def test_depth_profiles(profile):
    d = depth_map(20, 30, profile, seed=1)
    assert d.shape == (20, 30)
    assert d.min() >= 0.0 and d.max() <= 1.0
    assert d.max() - d.min() > 0.5


def test_unknown_profile():
    with pytest.raises(ParamError):
        depth_map(8, 8, 'spiral')


def test_clean_scene():
    img = clean_scene(40, seed=2)
    assert img.shape == (40, 40, 3)
    assert img.min() >= 0.02 and img.max() <= 0.9
    assert np.array_equal(img, clean_scene(40, seed=2))
    assert not np.array_equal(img, clean_scene(40, seed=3))
    gray = clean_scene((16, 24), seed=2, gray=True)
    assert gray.shape == (16, 24, 3)
    assert np.array_equal(gray[..., 0], gray[..., 2])


@pytest.mark.parametrize('profile', DEPTH_PROFILES)
def test_forward_model_is_exact(profile):
    clean = clean_scene(32, seed=6)
    scene = synthesize_haze(clean, profile, beta_s=1.3, A=(0.9, 0.8, 0.7),
                            seed=4)
    expected = clean * scene.t_gt[..., np.newaxis] + \
        scene.A_gt * (1 - scene.t_gt[..., np.newaxis])
    assert np.max(np.abs(scene.degraded - expected)) <= 1e-12
    assert scene.t_gt.min() > 0 and scene.t_gt.max() <= 1.0
    again = synthesize_haze(clean, profile, beta_s=1.3, A=(0.9, 0.8, 0.7),
                            seed=4)
    assert np.array_equal(scene.degraded, again.degraded)


def test_vanishing_scattering_keeps_clean():
    clean = clean_scene(16, seed=1)
    scene = synthesize_haze(clean, beta_s=1e-12)
    assert np.max(np.abs(scene.degraded - clean)) <= 1e-11


def test_opaque_haze_is_airlight():
    clean = clean_scene(16, seed=1)
    hazy = apply_scattering(clean, np.zeros((16, 16)), (0.3, 0.4, 0.5))
    assert np.allclose(hazy, [0.3, 0.4, 0.5])


def test_synthesize_haze_arguments():
    clean = clean_scene(16, seed=1)
    with pytest.raises(ParamError):
        synthesize_haze(clean, beta_s=0.0)
    with pytest.raises(ParamError):
        synthesize_haze(clean, A=(1.2, 0.5, 0.5))
    with pytest.raises(ParamError):
        synthesize_haze(clean, A=(0.5, 0.5))


def test_transmission_mse():
    t = np.linspace(0.2, 0.8, 64).reshape(8, 8)
    assert transmission_mse(t, t) == 0.0
    assert transmission_mse(t + 0.1, t) == pytest.approx(0.01)
    with pytest.raises(DimensionError):
        transmission_mse(t[:4], t)


def test_dark_channel_matches_loops(random_image):
    img = random_image(12, 15)
    assert np.array_equal(dark_channel(img, 2), naive_dark_channel(img, 2))


def test_dark_channel_baseline_on_white():
    t = dark_channel_baseline(np.ones((16, 16, 3)))
    assert np.allclose(t, 0.05)


def test_dark_channel_baseline_range(scene_image):
    t = dark_channel_baseline(scene_image, 3)
    assert t.shape == scene_image.shape[:2]
    assert t.min() >= 0.0 and t.max() <= 1.0


def test_corpus_is_reproducible():
    first = synthetic_corpus(count=3, size=24, seed=5)
    second = synthetic_corpus(count=3, size=24, seed=5)
    assert [s.profile for s in first] == list(DEPTH_PROFILES)
    for a, b in zip(first, second):
        assert np.array_equal(a.degraded, b.degraded)
        assert a.beta_s == b.beta_s
        assert CORPUS_BETA[0] <= a.beta_s <= CORPUS_BETA[1]
        assert CORPUS_AIRLIGHT[0] <= a.A_gt[0] <= CORPUS_AIRLIGHT[1]
        assert a.clean.max() <= CORPUS_PALETTE[1] + 0.06
    assert len(haze_pairs(count=4, size=16)) == 4


def test_dc_difference_stats():
    gray = clean_scene(16, seed=7, gray=True)
    frame = dc_difference_stats([(gray, gray)])
    assert list(frame.columns) == ['pair', 'channel', 'dc_clean',
                                   'mu_degraded', 'abs_diff',
                                   'cumulative_fraction']
    assert np.allclose(frame['abs_diff'], 0.0, atol=1e-12)

    pairs = haze_pairs(count=5, size=16, seed=1)
    frame = dc_difference_stats(pairs)
    assert len(frame) == 15
    assert frame['cumulative_fraction'].max() == 1.0
    ordered = frame.sort_values('abs_diff')
    assert ordered['cumulative_fraction'].is_monotonic_increasing
    with pytest.raises(DimensionError):
        dc_difference_stats([(gray, gray[:8])])


def test_radial_stats():
    constant = np.full((16, 16, 3), 0.4)
    frame = radial_stats([constant])
    assert list(frame.columns) == ['image', 'label', 'channel', 'phi']
    assert np.allclose(frame['phi'], 1.0, atol=1e-12)
    assert list(frame['channel']) == ['R', 'G', 'B']


def test_uniform_haze_raises_low_frequency_share():
    clean = clean_scene(32, seed=12)
    hazy = apply_scattering(clean, np.full((32, 32), 0.4), (0.9, 0.9, 0.9))
    frame = radial_stats([clean, hazy], labels=['clear', 'degraded'])
    phi = frame.pivot(index='channel', columns='label', values='phi')
    assert np.all(phi['degraded'] > phi['clear'])


def test_transmission_stats():
    scenes = synthetic_corpus(count=3, size=32, seed=2)
    frame = transmission_stats(scenes, patch_radius=3, threads=2)
    assert isinstance(frame, pandas.DataFrame)
    assert list(frame['scene']) == [0, 1, 2]
    assert list(frame['seed']) == [2, 3, 4]
    assert np.all(frame[['mse_sdp', 'mse_dcp']].to_numpy() >= 0)
    assert list(frame['sdp_better']) == list(frame['mse_sdp'] <
                                             frame['mse_dcp'])


def test_clean_scene_palette():
    dim = clean_scene(32, seed=4, palette=(0.02, 0.2))
    assert dim.min() >= 0.02 and dim.max() <= 0.26
    assert dim.mean() < clean_scene(32, seed=4).mean()


def test_sdp_beats_dark_channel_on_default_corpus():
    frame = run_stats('transmission-mse')
    assert len(frame) == 20
    assert frame['sdp_better'].mean() >= 0.7


def test_sample_paths():
    clear = sample_paths('clear')
    hazy = sample_paths('hazy')
    assert len(clear) == 10 and len(hazy) == 5
    assert [p[-6:] for p in hazy] == [p[-6:] for p in clear[:5]]
    with pytest.raises(ParamError):
        sample_paths('night')


def test_clear_samples_low_frequency_share():
    frame = radial_stats(sample_images('clear'))
    assert len(frame) == 30
    assert 0.003 <= frame['phi'].mean() <= 0.03


def test_hazy_samples_raise_low_frequency_share():
    hazy = sample_images('hazy')
    clear = sample_images('clear')[:len(hazy)]
    frame = radial_stats(clear + hazy, labels=['clear'] * len(clear) +
                         ['degraded'] * len(hazy))
    # Rows run image by image, channel by channel.
    phi = frame['phi'].to_numpy().reshape(2, len(hazy), 3)
    assert np.all(phi[1] > phi[0])
