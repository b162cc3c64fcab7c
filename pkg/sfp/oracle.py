#####################################################################
#                                                                   #
# /oracle.py                                                        #
#                                                                   #
# Copyright 2026, the sfp contributors                              #
#                                                                   #
# This file is part of the program sfp, and is licensed under the   #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Synthetic haze, ground truth, reference implementations and prior statistics.

Scenes are composed with the scattering model ``I = J*t + A*(1 - t)`` using a
procedural depth map ``d`` in ``[0, 1]`` and ``t = exp(-beta_s * d)``, so every
experiment runs without external datasets.
"""
import os
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas
from scipy import ndimage
from labscript_utils import dedent

from .errors import DimensionError, ParamError
from .frequency import fft2, low_freq_percentage
from .image_core import (IMAGE_EXTENSIONS, check_image, check_plane,
                         load_image)
from .spatial import (AIRLIGHT_FLOOR, AIRLIGHT_FRACTION, estimate_transmission,
                      spectral_direction)

logger = logging.getLogger(__name__)

DEPTH_PROFILES = ('linear-ramp', 'radial', 'perlin-like')
DCP_OMEGA = 0.95
CHANNELS = ('R', 'G', 'B')

PALETTE = (0.1, 0.85)
# Default corpus: dim, low-albedo scenes under dense, bright haze
CORPUS_PALETTE = (0.02, 0.2)
CORPUS_BETA = (1.4, 2.0)
CORPUS_AIRLIGHT = (0.9, 0.98)

SAMPLE_DIR = os.path.join(os.path.dirname(os.path.realpath(__file__)),
                          'samples')
SAMPLE_KINDS = ('clear', 'hazy')


@dataclass(frozen=True)
class SyntheticScene:
    clean: np.ndarray
    t_gt: np.ndarray
    A_gt: np.ndarray
    degraded: np.ndarray
    seed: int
    profile: str = 'linear-ramp'
    beta_s: float = 1.0


def value_noise(height, width, rng, octaves=4, base_cells=4):
    """Smooth fractal noise in ``[0, 1]`` built from bilinear random lattices."""
    total = np.zeros((height, width))
    amplitude = 1.0
    for octave in range(octaves):
        cells = base_cells * 2 ** octave
        lattice = rng.random((cells + 1, cells + 1))
        rows = np.linspace(0, cells, height)
        cols = np.linspace(0, cells, width)
        coords = np.meshgrid(rows, cols, indexing='ij')
        total += amplitude * ndimage.map_coordinates(lattice, coords, order=1)
        amplitude /= 2.0
    span = total.max() - total.min()
    if span == 0:
        return np.zeros_like(total)
    return (total - total.min()) / span


def depth_map(height, width, profile='linear-ramp', seed=0):
    """Procedural depth in ``[0, 1]`` (1 is far).

    ``'linear-ramp'`` grows from the bottom row to the top row, ``'radial'``
    from the image centre outwards and ``'perlin-like'`` is seeded value noise.
    """
    if profile == 'linear-ramp':
        column = np.linspace(1.0, 0.0, height)[:, np.newaxis]
        return np.repeat(column, width, axis=1)
    elif profile == 'radial':
        y, x = np.mgrid[0:height, 0:width].astype(np.float64)
        r = np.hypot(y - (height - 1) / 2.0, x - (width - 1) / 2.0)
        return r / r.max()
    elif profile == 'perlin-like':
        return value_noise(height, width, np.random.default_rng(seed))
    msg = """Unknown depth profile {profile!r}; expected one of
        {profiles}.""".format(profile=profile, profiles=DEPTH_PROFILES)
    raise ParamError(dedent(msg))


def apply_scattering(clean, t, A):
    """Forward scattering model ``clean * t + A * (1 - t)``."""
    clean = check_image(clean, 'clean')
    t = check_plane(t, 't', shape=clean.shape[:2])[..., np.newaxis]
    A = np.asarray(A, dtype=np.float64)
    return clean * t + A * (1.0 - t)


def synthesize_haze(clean, depth_profile='linear-ramp', beta_s=1.0,
                    A=(0.9, 0.9, 0.9), seed=0):
    """Compose a hazy scene with known transmission and airlight.

    Args:
        clean (:obj:`numpy:numpy.ndarray`): Clean ``(H, W, 3)`` image.
        depth_profile (str, optional): One of :data:`DEPTH_PROFILES`.
        beta_s (float, optional): Scattering coefficient, ``> 0``.
        A (sequence, optional): Airlight, components in ``(0, 1]``.
        seed (int, optional): Seed of the ``'perlin-like'`` profile.

    Returns:
        SyntheticScene: The scene with its ground truth.

    Raises:
        ParamError: If ``beta_s`` or ``A`` is out of range.
    """
    clean = check_image(clean, 'clean')
    if not beta_s > 0:
        raise ParamError("beta_s must be > 0, got %r." % beta_s)
    A = np.asarray(A, dtype=np.float64)
    if A.shape != (3,) or not np.all((A > 0) & (A <= 1)):
        raise ParamError("A must have 3 components in (0, 1], got %r." %
                         (A.tolist(),))
    d = depth_map(clean.shape[0], clean.shape[1], depth_profile, seed)
    t = np.exp(-beta_s * d)
    return SyntheticScene(
        clean=clean,
        t_gt=t,
        A_gt=A,
        degraded=apply_scattering(clean, t, A),
        seed=int(seed),
        profile=depth_profile,
        beta_s=float(beta_s),
    )


def clean_scene(size=128, seed=0, gray=False, palette=PALETTE):
    """Procedural clean image: blended colour regions plus fine texture.

    Region colours are drawn uniformly from the `palette` range. Samples stay
    within ``[0.02, 0.9]``. With ``gray=True`` the three planes are identical.
    """
    rng = np.random.default_rng(seed)
    height, width = (size, size) if np.isscalar(size) else size
    colours = rng.uniform(*palette, size=(3, 3))
    weights = np.stack(
        [value_noise(height, width, rng, octaves=3, base_cells=2)
         for _ in range(3)],
        axis=-1,
    ) ** 3 + 1e-6
    weights /= weights.sum(axis=-1, keepdims=True)
    img = weights @ colours
    texture = value_noise(height, width, rng, octaves=2, base_cells=16)
    img = img + 0.12 * (texture[..., np.newaxis] - 0.5)
    if gray:
        img = np.repeat(img.mean(axis=-1, keepdims=True), 3, axis=-1)
    return np.clip(img, 0.02, 0.9)


def synthetic_corpus(count=20, size=128, seed=0):
    """Hazy scenes cycling through the depth profiles.

    Scene ``i`` uses seed ``seed + i`` and colours from
    :data:`CORPUS_PALETTE`. Scattering strength (:data:`CORPUS_BETA`) and
    achromatic airlight level (:data:`CORPUS_AIRLIGHT`) are drawn from a
    generator seeded with ``seed``.
    """
    rng = np.random.default_rng(seed)
    scenes = []
    for i in range(count):
        beta_s = float(rng.uniform(*CORPUS_BETA))
        level = float(rng.uniform(*CORPUS_AIRLIGHT))
        scenes.append(synthesize_haze(
            clean_scene(size, seed + i, palette=CORPUS_PALETTE),
            depth_profile=DEPTH_PROFILES[i % len(DEPTH_PROFILES)],
            beta_s=beta_s,
            A=(level, level, level),
            seed=seed + i,
        ))
    return scenes


def haze_pairs(count=100, size=64, seed=0):
    """``(degraded, clean)`` pairs with achromatic airlight and moderate haze."""
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(count):
        level = float(rng.uniform(0.6, 0.9))
        scene = synthesize_haze(
            clean_scene(size, seed + i),
            depth_profile=DEPTH_PROFILES[i % len(DEPTH_PROFILES)],
            beta_s=float(rng.uniform(0.2, 0.8)),
            A=(level, level, level),
            seed=seed + i,
        )
        pairs.append((scene.degraded, scene.clean))
    return pairs


def sample_paths(kind='clear'):
    """Bundled sample images of one kind, sorted by name.

    ``hazy/NN.png`` is ``clear/NN.png`` under synthetic haze, so the two
    lists pair up index by index as far as the hazy list goes.
    """
    if kind not in SAMPLE_KINDS:
        msg = """Unknown sample kind {kind!r}; expected one of
            {kinds}.""".format(kind=kind, kinds=SAMPLE_KINDS)
        raise ParamError(dedent(msg))
    folder = os.path.join(SAMPLE_DIR, kind)
    return sorted(
        os.path.join(folder, name) for name in os.listdir(folder)
        if name.lower().endswith(IMAGE_EXTENSIONS)
    )


def sample_images(kind='clear'):
    return [load_image(path) for path in sample_paths(kind)]


def transmission_mse(t_est, t_gt):
    """Mean squared difference of two transmission maps."""
    t_gt = check_plane(t_gt, 't_gt')
    t_est = check_plane(t_est, 't_est', shape=t_gt.shape)
    return float(np.mean((t_est - t_gt) ** 2))


def dark_channel(img, patch_radius=7):
    """Minimum over channels and the ``(2r+1)^2`` patch, edge replicated."""
    img = np.asarray(img, dtype=np.float64)
    return ndimage.minimum_filter(img.min(axis=-1), size=2 * patch_radius + 1,
                                  mode='nearest')


def dark_channel_airlight(img, dark):
    """Mean colour of the 0.1% brightest dark-channel pixels."""
    count = int(np.ceil(AIRLIGHT_FRACTION * dark.size))
    order = np.argsort(-dark.ravel(), kind='stable')[:count]
    return np.clip(img.reshape(-1, 3)[order].mean(axis=0), AIRLIGHT_FLOOR, 1.0)


def dark_channel_baseline(img, patch_radius=7, omega=DCP_OMEGA):
    """Dark-channel transmission estimate without refinement.

    ``t = 1 - omega * dark(I / A)``, clamped to ``[0, 1]``.
    """
    img = check_image(img)
    A = dark_channel_airlight(img, dark_channel(img, patch_radius))
    t = 1.0 - omega * dark_channel(img / A, patch_radius)
    return np.clip(t, 0.0, 1.0)


def sdp_transmission(img, patch_radius=7, operator='magnitude'):
    return estimate_transmission(
        img, spectral_direction(img, patch_radius, operator)
    ).values


def check_pairs(pairs):
    for degraded, clean in pairs:
        if np.shape(degraded) != np.shape(clean):
            msg = """Degraded and clean images differ in shape: {a} vs
                {b}.""".format(a=np.shape(degraded), b=np.shape(clean))
            raise DimensionError(dedent(msg))
    return pairs


def _cumulative_fraction(values):
    values = np.asarray(values, dtype=np.float64)
    ranks = np.searchsorted(np.sort(values), values, side='right')
    return ranks / max(values.size, 1)


def dc_difference_stats(pairs):
    """DC of each clean channel against the mean DC of the degraded image.

    Returns:
        :obj:`pandas:pandas.DataFrame`: One row per pair and channel with
        columns ``pair, channel, dc_clean, mu_degraded, abs_diff,
        cumulative_fraction``.
    """
    rows = []
    for index, (degraded, clean) in enumerate(check_pairs(list(pairs))):
        degraded = check_image(degraded, 'degraded')
        clean = check_image(clean, 'clean')
        mu = sum(fft2(degraded[..., c]).dc for c in range(3)) / 3.0
        for c, channel in enumerate(CHANNELS):
            dc_clean = fft2(clean[..., c]).dc
            rows.append({
                'pair': index,
                'channel': channel,
                'dc_clean': dc_clean,
                'mu_degraded': mu,
                'abs_diff': abs(dc_clean - mu),
            })
    frame = pandas.DataFrame(
        rows, columns=['pair', 'channel', 'dc_clean', 'mu_degraded',
                       'abs_diff']
    )
    frame['cumulative_fraction'] = _cumulative_fraction(frame['abs_diff'])
    return frame


def radial_stats(images, thresh=0.001, rho_norm='cycles', labels=None):
    """Low-frequency share of every channel of every image.

    Returns:
        :obj:`pandas:pandas.DataFrame`: Columns ``image, label, channel, phi``.
    """
    if labels is None:
        labels = [''] * len(images)
    rows = []
    for index, (img, label) in enumerate(zip(images, labels)):
        img = check_image(img)
        for c, channel in enumerate(CHANNELS):
            rows.append({
                'image': index,
                'label': label,
                'channel': channel,
                'phi': low_freq_percentage(fft2(img[..., c]), thresh,
                                           rho_norm),
            })
    return pandas.DataFrame(rows, columns=['image', 'label', 'channel', 'phi'])


def transmission_stats(scenes, patch_radius=7, operator='magnitude',
                       threads=1):
    """Transmission MSE of the spectral-direction and dark-channel estimates.

    Scenes are processed on a pool of ``threads`` workers; rows keep the scene
    order.

    Returns:
        :obj:`pandas:pandas.DataFrame`: Columns ``scene, seed, profile,
        beta_s, mse_sdp, mse_dcp, sdp_better``.
    """
    def evaluate(indexed):
        index, scene = indexed
        mse_sdp = transmission_mse(
            sdp_transmission(scene.degraded, patch_radius, operator),
            scene.t_gt,
        )
        mse_dcp = transmission_mse(
            dark_channel_baseline(scene.degraded, patch_radius), scene.t_gt
        )
        return {
            'scene': index,
            'seed': scene.seed,
            'profile': scene.profile,
            'beta_s': scene.beta_s,
            'mse_sdp': mse_sdp,
            'mse_dcp': mse_dcp,
            'sdp_better': bool(mse_sdp < mse_dcp),
        }

    with ThreadPoolExecutor(max_workers=threads) as executor:
        rows = list(executor.map(evaluate, enumerate(scenes)))
    return pandas.DataFrame(
        rows, columns=['scene', 'seed', 'profile', 'beta_s', 'mse_sdp',
                       'mse_dcp', 'sdp_better']
    )


# Brute-force references. Deliberately direct and slow.

def naive_dft2(x):
    """Forward DFT scaled by ``1/(H*W)``, by explicit DFT matrices."""
    x = np.asarray(x, dtype=np.complex128)
    height, width = x.shape
    rows = np.exp(-2j * np.pi * np.outer(np.arange(height), np.arange(height))
                  / height)
    cols = np.exp(-2j * np.pi * np.outer(np.arange(width), np.arange(width))
                  / width)
    return rows @ x @ cols / (height * width)


def naive_idft2(coeffs):
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    height, width = coeffs.shape
    rows = np.exp(2j * np.pi * np.outer(np.arange(height), np.arange(height))
                  / height)
    cols = np.exp(2j * np.pi * np.outer(np.arange(width), np.arange(width))
                  / width)
    return rows @ coeffs @ cols


def _window(index, radius, size):
    return np.clip(np.arange(index - radius, index + radius + 1), 0, size - 1)


def naive_box_mean(plane, radius):
    plane = np.asarray(plane, dtype=np.float64)
    height, width = plane.shape
    out = np.empty_like(plane)
    for y in range(height):
        rows = _window(y, radius, height)
        for x in range(width):
            cols = _window(x, radius, width)
            out[y, x] = plane[np.ix_(rows, cols)].mean()
    return out


def naive_guided_filter(p, guide, radius, eps):
    """Guided filter with every window statistic gathered pixel by pixel."""
    p = np.asarray(p, dtype=np.float64)
    guide = np.asarray(guide, dtype=np.float64)
    height, width = p.shape
    a = np.empty_like(p)
    b = np.empty_like(p)
    for y in range(height):
        rows = _window(y, radius, height)
        for x in range(width):
            cols = _window(x, radius, width)
            g = guide[np.ix_(rows, cols)]
            q = p[np.ix_(rows, cols)]
            cov = np.mean(g * q) - g.mean() * q.mean()
            var = np.mean(g * g) - g.mean() ** 2
            a[y, x] = cov / (var + eps)
            b[y, x] = q.mean() - a[y, x] * g.mean()
    return naive_box_mean(a, radius) * guide + naive_box_mean(b, radius)


def naive_spectral_direction(img, patch_radius):
    """Spectral direction by explicit per-pixel gradient and patch loops."""
    img = np.asarray(img, dtype=np.float64)
    height, width, _ = img.shape
    unit = np.empty_like(img)
    for y in range(height):
        for x in range(width):
            gx = (img[y, min(x + 1, width - 1)] - img[y, max(x - 1, 0)]) / 2.0
            gy = (img[min(y + 1, height - 1), x] - img[max(y - 1, 0), x]) / 2.0
            triple = np.sqrt(gx ** 2 + gy ** 2)
            norm = np.sqrt(np.sum(triple ** 2))
            if norm < 1e-12:
                unit[y, x] = 1.0 / np.sqrt(3.0)
            else:
                unit[y, x] = triple / norm
    out = np.empty_like(img)
    for y in range(height):
        rows = _window(y, patch_radius, height)
        for x in range(width):
            cols = _window(x, patch_radius, width)
            mean = unit[np.ix_(rows, cols)].reshape(-1, 3).mean(axis=0)
            out[y, x] = mean / np.sqrt(np.sum(mean ** 2))
    return out


def naive_dark_channel(img, patch_radius):
    img = np.asarray(img, dtype=np.float64)
    height, width, _ = img.shape
    out = np.empty((height, width))
    for y in range(height):
        rows = _window(y, patch_radius, height)
        for x in range(width):
            cols = _window(x, patch_radius, width)
            out[y, x] = img[np.ix_(rows, cols)].min()
    return out


def naive_low_freq_percentage(coeffs, thresh):
    """Two-pass low-frequency share with explicit signed bin indices."""
    coeffs = np.asarray(coeffs)
    height, width = coeffs.shape
    total = 0.0
    for v in range(height):
        for u in range(width):
            total += abs(coeffs[v, u])
    band = []
    for v in range(height):
        sv = v - height if v >= (height + 1) // 2 else v
        for u in range(width):
            su = u - width if u >= (width + 1) // 2 else u
            if np.sqrt((su / width) ** 2 + (sv / height) ** 2) < thresh:
                band.append((v, u))
    if len(band) <= 1:
        band = [(dv % height, du % width)
                for dv in (-1, 0, 1) for du in (-1, 0, 1)]
    low = 0.0
    for v, u in band:
        low += abs(coeffs[v, u])
    return low / total

