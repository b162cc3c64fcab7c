#####################################################################
#                                                                   #
# /fusion.py                                                        #
#                                                                   #
# Copyright 2026, the sfp contributors                              #
#                                                                   #
# This file is part of the program sfp, and is licensed under the   #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Lab-space fusion of the input and the two restorations, plus tone mapping.

The a and b planes are blended with weights favouring sources whose mean
chroma is closest to neutral. The L plane keeps the base band of the spatial
restoration and the strongest detail coefficient of the three sources.
"""
import logging
from dataclasses import dataclass

import numpy as np
import pywt
from labscript_utils import dedent

from .errors import DimensionError, ParamError
from .image_core import (check_image, check_plane, lab_to_rgb, luminance,
                         rgb_to_lab)

logger = logging.getLogger(__name__)

SOURCES = ('I', 'J', 'E')
CHROMA_PLANES = ('a', 'b')
DETAIL_BANDS = ('LH', 'HL', 'HH')
GAMMA_BOUNDS = (0.5, 2.5)
WHITE_QUANTILE = 0.98
WHITE_FLOOR = 1.0
# Brighter means would flip the sign of the gamma exponent.
MEAN_CEILING = 0.999


@dataclass(frozen=True)
class FusionWeights:
    """Weights of shape ``(3, 2)``: rows I, J, E; columns a, b."""
    weights: np.ndarray

    def weight(self, source, plane):
        return float(
            self.weights[SOURCES.index(source), CHROMA_PLANES.index(plane)]
        )

    def to_dict(self):
        return {
            source: {plane: self.weight(source, plane)
                     for plane in CHROMA_PLANES}
            for source in SOURCES
        }


@dataclass(frozen=True)
class WaveletBands:
    """One-level Haar decomposition. ``shape`` is the unpadded plane shape."""
    LL: np.ndarray
    LH: np.ndarray
    HL: np.ndarray
    HH: np.ndarray
    shape: tuple


@dataclass(frozen=True)
class ToneCurve:
    """Adaptive gamma followed by highlight compression.

    ``s' = s**gamma``, then ``s'' = s' * (1 + s'/white**2) / (1 + s')``.

    ``white`` is the 98th percentile of the gamma-corrected luminance, never
    below 1. The compression maps ``white`` to 1 and never brightens a
    sample; with ``white == 1`` it is the identity, so an image inside
    ``[0, 1]`` only gets the gamma step. Unclamped fusion output above 1 is
    brought back into range instead of being cut.
    """
    gamma: float
    white: float

    @classmethod
    def estimate(cls, img):
        """Curve for a non-negative image; samples above 1 are allowed."""
        img = np.maximum(np.asarray(img, dtype=np.float64), 0.0)
        mean_luminance = min(float(luminance(img).mean()), MEAN_CEILING)
        gamma = np.log(0.5) / np.log(mean_luminance + 1e-6)
        gamma = float(np.clip(gamma, *GAMMA_BOUNDS))
        white = float(np.quantile(luminance(img ** gamma), WHITE_QUANTILE))
        return cls(gamma=gamma, white=max(white, WHITE_FLOOR))

    def apply(self, img):
        out = np.maximum(np.asarray(img, dtype=np.float64), 0.0) ** self.gamma
        out = out * (1.0 + out / self.white ** 2) / (1.0 + out)
        return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True)
class FusionInfo:
    weights: FusionWeights = None
    tone: ToneCurve = None


def fusion_weights(means_I, means_J, means_E):
    """Softmax of ``-|mean|`` across the three sources, per chroma plane.

    Args:
        means_I, means_J, means_E: ``(mean_a, mean_b)`` of each source.

    Returns:
        FusionWeights: Weights summing to one per plane.

    Raises:
        ParamError: If a mean is not finite.
    """
    means = np.array([means_I, means_J, means_E], dtype=np.float64)
    if means.shape != (3, 2) or not np.all(np.isfinite(means)):
        msg = """Fusion needs finite (a, b) means for each of I, J, E; got
            {means}.""".format(means=means.tolist())
        raise ParamError(dedent(msg))
    logits = -np.abs(means)
    logits -= logits.max(axis=0)
    exps = np.exp(logits)
    return FusionWeights(weights=exps / exps.sum(axis=0))


def chroma_means(lab):
    return float(lab[..., 1].mean()), float(lab[..., 2].mean())


def _check_same_shape(arrays, names):
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        msg = """{names} must share one shape, got {shapes}.""".format(
            names=', '.join(names), shapes=[a.shape for a in arrays]
        )
        raise DimensionError(dedent(msg))


def fuse_ab(I_lab, J_lab, E_lab):
    """Blend the a and b planes of three Lab images.

    Returns:
        tuple: ``(a, b, FusionWeights)``.

    Raises:
        DimensionError: If the images differ in shape.
    """
    sources = [np.asarray(x, dtype=np.float64) for x in (I_lab, J_lab, E_lab)]
    _check_same_shape(sources, SOURCES)
    weights = fusion_weights(*[chroma_means(lab) for lab in sources])
    fused = [
        sum(weights.weights[s, p] * sources[s][..., p + 1] for s in range(3))
        for p in range(2)
    ]
    logger.debug('Chroma weights %s', weights.to_dict())
    return fused[0], fused[1], weights


def dwt_haar(plane):
    """One-level orthonormal Haar transform.

    Odd dimensions are edge-padded to even; the original shape is kept on the
    result so :func:`idwt_haar` can crop.
    """
    plane = check_plane(plane)
    height, width = plane.shape
    padded = np.pad(plane, ((0, height % 2), (0, width % 2)), mode='edge')
    LL, (LH, HL, HH) = pywt.dwt2(padded, 'haar', mode='periodization')
    return WaveletBands(LL=LL, LH=LH, HL=HL, HH=HH, shape=(height, width))


def idwt_haar(bands):
    height, width = bands.shape
    plane = pywt.idwt2(
        (bands.LL, (bands.LH, bands.HL, bands.HH)), 'haar',
        mode='periodization'
    )
    return np.ascontiguousarray(plane[:height, :width])


def fuse_l_bands(I_l, J_l, E_l):
    """Wavelet bands of the fused L plane.

    LL comes from ``J_l``. Each detail coefficient is the one with the largest
    magnitude among the three sources, sign included.
    """
    planes = [check_plane(x, name) for x, name in zip((I_l, J_l, E_l), SOURCES)]
    _check_same_shape(planes, SOURCES)
    bands = [dwt_haar(plane) for plane in planes]
    detail = {}
    for name in DETAIL_BANDS:
        stack = np.stack([getattr(b, name) for b in bands])
        pick = np.argmax(np.abs(stack), axis=0)
        detail[name] = np.take_along_axis(stack, pick[np.newaxis], axis=0)[0]
    return WaveletBands(LL=bands[1].LL, shape=bands[1].shape, **detail)


def fuse_l(I_l, J_l, E_l):
    """Fuse three L planes; the result is clamped to ``[0, 100]``."""
    return np.clip(idwt_haar(fuse_l_bands(I_l, J_l, E_l)), 0.0, 100.0)


def postprocess(img):
    """Adaptive gamma and highlight compression, see :class:`ToneCurve`."""
    img = check_image(img)
    return ToneCurve.estimate(img).apply(img)


def fuse(I, J, E, weighted=True, post=True):
    """Fuse the input with its spatial and frequency restorations.

    Args:
        I, J, E (:obj:`numpy:numpy.ndarray`): Input, spatial restoration and
            frequency enhancement, all ``(H, W, 3)``.
        weighted (bool, optional): Set to `False` for a plain pixel average of
            the three sources instead of Lab fusion.
        post (bool, optional): Set to `False` to skip :func:`postprocess`.

    Returns:
        tuple: ``(fused, FusionInfo)``.
    """
    images = [check_image(x, name) for x, name in zip((I, J, E), SOURCES)]
    _check_same_shape(images, SOURCES)
    weights = None
    if weighted:
        labs = [rgb_to_lab(x) for x in images]
        a, b, weights = fuse_ab(*labs)
        L = fuse_l(*[lab[..., 0] for lab in labs])
        fused = lab_to_rgb(np.stack([L, a, b], axis=-1), clip=not post)
        fused = np.maximum(fused, 0.0)
    else:
        fused = (images[0] + images[1] + images[2]) / 3.0
    tone = None
    if post:
        tone = ToneCurve.estimate(fused)
        fused = tone.apply(fused)
        logger.debug('Tone curve gamma %.4f white %.4f', tone.gamma,
                     tone.white)
    return np.clip(fused, 0.0, 1.0), FusionInfo(weights=weights, tone=tone)
