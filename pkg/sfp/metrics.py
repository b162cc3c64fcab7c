#####################################################################
#                                                                   #
# /metrics.py                                                       #
#                                                                   #
# Copyright 2026, the sfp contributors                              #
#                                                                   #
# This file is part of the program sfp, and is licensed under the   #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
import numpy as np

from .errors import DimensionError, ParamError
from .image_core import check_image, rgb_to_lab

UCIQE_COEFFS = (0.4680, 0.2745, 0.2576)
# a and b are divided by this so chroma and L/100 share a scale.
CHROMA_SCALE = 128.0


def uciqe(img, coeffs=UCIQE_COEFFS):
    """No-reference colour quality score.

    ``c1 * std(chroma) + c2 * contrast + c3 * mean(saturation)`` where chroma
    is ``hypot(a, b) / 128``, contrast is the spread between the 99th and 1st
    percentiles of ``L / 100`` and saturation is
    ``chroma / sqrt(chroma**2 + (L/100)**2)`` (zero where both vanish).

    Args:
        img (:obj:`numpy:numpy.ndarray`): ``(H, W, 3)`` image.
        coeffs (sequence, optional): Three weights. Defaults to
            ``(0.4680, 0.2745, 0.2576)``.

    Returns:
        float: The score.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (3,) or not np.all(np.isfinite(coeffs)):
        raise ParamError("coeffs must be three finite numbers, got %r." %
                         (coeffs.tolist(),))
    lab = rgb_to_lab(check_image(img))
    lightness = lab[..., 0] / 100.0
    chroma = np.hypot(lab[..., 1], lab[..., 2]) / CHROMA_SCALE
    spread = np.hypot(chroma, lightness)
    saturation = np.divide(chroma, spread, out=np.zeros_like(chroma),
                           where=spread > 0)
    contrast = np.percentile(lightness, 99) - np.percentile(lightness, 1)
    return float(coeffs[0] * chroma.std() + coeffs[1] * contrast
                 + coeffs[2] * saturation.mean())


def psnr(img, reference, peak=1.0):
    """Peak signal-to-noise ratio in dB; `inf` for identical images."""
    img = np.asarray(img, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if img.shape != reference.shape:
        raise DimensionError("Cannot compare shapes %s and %s." %
                             (img.shape, reference.shape))
    mse = np.mean((img - reference) ** 2)
    if mse == 0:
        return float('inf')
    return float(10.0 * np.log10(peak ** 2 / mse))
