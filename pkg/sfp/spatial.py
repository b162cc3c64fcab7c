#####################################################################
#                                                                   #
# /spatial.py                                                       #
#                                                                   #
# Copyright 2026, the sfp contributors                              #
#                                                                   #
# This file is part of the program sfp, and is licensed under the   #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Spatial-domain restoration.

Transmission is estimated by projecting the inverted image onto the local
spectral direction (the patch-averaged direction of per-channel gradient
magnitudes), atmospheric light is read off the least transmissive pixels, and
the scattering model is inverted with a guided-filter refined transmission.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from labscript_utils import dedent

from .errors import DimensionError, ParamError
from .image_core import check_image, check_plane, luminance

logger = logging.getLogger(__name__)

FALLBACK_DIRECTION = np.full(3, 1.0 / np.sqrt(3.0))
DEGENERATE_NORM = 1e-12
GRADIENT_OPERATORS = ('magnitude', 'l1')

T_MIN_FRACTION = 0.05
T_MIN_FLOOR = 0.01
AIRLIGHT_FRACTION = 0.001
AIRLIGHT_FLOOR = 0.05


@dataclass(frozen=True)
class DirectionField:
    """Per-pixel unit 3-vectors, shape ``(H, W, 3)``.

    ``degenerate`` is set when no pixel had a usable gradient, in which case
    every vector is the fallback direction.
    """
    vectors: np.ndarray
    degenerate: bool = False


@dataclass(frozen=True)
class TransmissionMap:
    values: np.ndarray
    t_min: float

    @property
    def stats(self):
        return {
            'min': float(self.values.min()),
            'mean': float(self.values.mean()),
            't_min': float(self.t_min),
        }


@dataclass(frozen=True)
class Atmosphere:
    A: np.ndarray


def _check_radius(radius, name):
    if int(radius) != radius or radius < 1:
        raise ParamError("%s must be an integer >= 1, got %r." % (name, radius))
    return int(radius)


def box_mean(plane, radius):
    """Mean over ``(2r+1)^2`` windows with edge-replicated borders.

    Uses running sums, so the cost per pixel does not depend on ``radius``.
    """
    return ndimage.uniform_filter(
        np.asarray(plane, dtype=np.float64), size=2 * radius + 1, mode='nearest'
    )


def channel_gradients(img, operator='magnitude'):
    """Per-channel gradient strength from central differences.

    Args:
        img (:obj:`numpy:numpy.ndarray`): ``(H, W, 3)`` image.
        operator (str, optional): ``'magnitude'`` for the Euclidean norm of the
            2-D gradient, ``'l1'`` for ``|gx| + |gy|``.

    Returns:
        :obj:`numpy:numpy.ndarray`: ``(H, W, 3)`` non-negative array.
    """
    padded = np.pad(img, ((1, 1), (1, 1), (0, 0)), mode='edge')
    gx = (padded[1:-1, 2:] - padded[1:-1, :-2]) / 2.0
    gy = (padded[2:, 1:-1] - padded[:-2, 1:-1]) / 2.0
    if operator == 'magnitude':
        return np.hypot(gx, gy)
    elif operator == 'l1':
        return np.abs(gx) + np.abs(gy)
    msg = """Unknown gradient operator {op!r}; expected one of
        {ops}.""".format(op=operator, ops=GRADIENT_OPERATORS)
    raise ParamError(dedent(msg))


def spectral_direction(img, patch_radius=7, operator='magnitude'):
    """Estimate the spectral direction field of an image.

    The per-channel gradient triple at every pixel is normalised to unit
    length (flat pixels take the fallback ``(1, 1, 1)/sqrt(3)``), averaged over
    the ``(2r+1)^2`` patch around each pixel and normalised again.

    Args:
        img (:obj:`numpy:numpy.ndarray`): ``(H, W, 3)`` image.
        patch_radius (int, optional): Patch radius ``r``. Defaults to 7.
        operator (str, optional): Gradient operator, see
            :func:`channel_gradients`.

    Returns:
        DirectionField: The unit direction field. ``degenerate`` is `True`
        when the image is constant.
    """
    img = check_image(img)
    radius = _check_radius(patch_radius, 'patch_radius')
    grads = channel_gradients(img, operator)
    norms = np.sqrt(np.sum(grads ** 2, axis=-1))
    flat = norms < DEGENERATE_NORM
    safe_norms = np.where(flat, 1.0, norms)
    unit = np.where(flat[..., np.newaxis], FALLBACK_DIRECTION,
                    grads / safe_norms[..., np.newaxis])
    averaged = np.stack(
        [box_mean(unit[..., c], radius) for c in range(3)], axis=-1
    )
    lengths = np.sqrt(np.sum(averaged ** 2, axis=-1))
    vectors = averaged / lengths[..., np.newaxis]
    degenerate = bool(flat.all())
    if degenerate:
        logger.warning('Image is constant; spectral direction falls back to '
                       'the neutral axis everywhere.')
    return DirectionField(vectors=vectors, degenerate=degenerate)


def lowest_fraction_mean(values, fraction):
    """Mean of the ``ceil(fraction * N)`` smallest values."""
    flat = np.sort(np.asarray(values, dtype=np.float64).ravel())
    count = max(int(np.ceil(fraction * flat.size)), 1)
    return float(flat[:count].mean())


def transmission_from_values(values):
    """Wrap a raw transmission estimate, clamping and recording ``t_min``."""
    values = np.clip(check_plane(values, 'transmission'), 0.0, 1.0)
    t_min = max(lowest_fraction_mean(values, T_MIN_FRACTION), T_MIN_FLOOR)
    return TransmissionMap(values=values, t_min=min(t_min, 1.0))


def estimate_transmission(img, S):
    """Project ``1 - I`` onto the spectral direction.

    ``p = <S, 1 - I>``, the projected vector is ``p * S`` and its channel
    mean is the transmission, clamped to ``[0, 1]``.

    Args:
        img (:obj:`numpy:numpy.ndarray`): ``(H, W, 3)`` image.
        S (DirectionField): Direction field of the same size.

    Returns:
        TransmissionMap: Transmission with ``t_min`` the mean of the lowest 5%
        of values, floored at 0.01.

    Raises:
        DimensionError: If the image and direction field sizes differ.
    """
    img = check_image(img)
    if S.vectors.shape != img.shape:
        msg = """Direction field shape {s} does not match image shape
            {i}.""".format(s=S.vectors.shape, i=img.shape)
        raise DimensionError(dedent(msg))
    p = np.sum(S.vectors * (1.0 - img), axis=-1)
    t = p * np.sum(S.vectors, axis=-1) / 3.0
    transmission = transmission_from_values(t)
    logger.debug('Transmission mean %.4f, t_min %.4f',
                 transmission.values.mean(), transmission.t_min)
    return transmission


def estimate_atmospheric_light(img, t):
    """Average the image over the 0.1% of pixels with the lowest transmission.

    Ties are broken in row-major order. Each component is clamped to
    ``[0.05, 1]``.
    """
    img = check_image(img)
    values = t.values if isinstance(t, TransmissionMap) else t
    values = check_plane(values, 'transmission', shape=img.shape[:2])
    count = int(np.ceil(AIRLIGHT_FRACTION * values.size))
    selected = np.argsort(values.ravel(), kind='stable')[:count]
    A = img.reshape(-1, 3)[selected].mean(axis=0)
    A = np.clip(A, AIRLIGHT_FLOOR, 1.0)
    logger.debug('Atmospheric light %s from %d pixels', A, count)
    return Atmosphere(A=A)


def guided_filter(p, guide, radius=16, eps=1e-3):
    """Edge-preserving smoothing of ``p`` steered by ``guide``.

    Args:
        p (:obj:`numpy:numpy.ndarray`): Map to filter.
        guide (:obj:`numpy:numpy.ndarray`): Guide map of the same shape.
        radius (int, optional): Window radius. Defaults to 16.
        eps (float, optional): Regularisation. Defaults to 1e-3.

    Returns:
        :obj:`numpy:numpy.ndarray`: ``mean(a) * guide + mean(b)``.

    Raises:
        DimensionError: If ``p`` and ``guide`` differ in shape.
        ParamError: If ``radius < 1`` or ``eps <= 0``.
    """
    guide = check_plane(guide, 'guide')
    p = check_plane(p, 'p', shape=guide.shape)
    radius = _check_radius(radius, 'radius')
    if not eps > 0:
        raise ParamError("eps must be > 0, got %r." % eps)
    mean_I = box_mean(guide, radius)
    mean_p = box_mean(p, radius)
    var_I = box_mean(guide * guide, radius) - mean_I * mean_I
    cov_Ip = box_mean(guide * p, radius) - mean_I * mean_p
    a = cov_Ip / (var_I + eps)
    b = mean_p - a * mean_I
    return box_mean(a, radius) * guide + box_mean(b, radius)


def invert_asm(img, t, A, gf_radius=16, gf_eps=1e-3, refine=True):
    """Recover scene radiance from the scattering model.

    ``J = (I - A) / max(GF(max(t, t_min)), t_min) + A``, clamped to
    ``[0, 1]``. The guided filter uses the image luminance as guide.

    Args:
        img (:obj:`numpy:numpy.ndarray`): Degraded ``(H, W, 3)`` image.
        t (TransmissionMap): Transmission estimate.
        A (Atmosphere): Atmospheric light.
        gf_radius (int, optional): Guided filter radius.
        gf_eps (float, optional): Guided filter regularisation.
        refine (bool, optional): Set to `False` to skip guided filtering and
            divide by ``max(t, t_min)`` directly.
    """
    img = check_image(img)
    values = check_plane(t.values, 'transmission', shape=img.shape[:2])
    floored = np.maximum(values, t.t_min)
    if refine:
        floored = guided_filter(floored, luminance(img), gf_radius, gf_eps)
    denominator = np.maximum(floored, t.t_min)[..., np.newaxis]
    airlight = np.asarray(A.A, dtype=np.float64)
    J = (img - airlight) / denominator + airlight
    return np.clip(J, 0.0, 1.0)


@dataclass(frozen=True)
class SpatialResult:
    direction: DirectionField
    transmission: TransmissionMap
    atmosphere: Atmosphere


def restore(img, patch_radius=7, gf_radius=16, gf_eps=1e-3,
            operator='magnitude', estimator=None):
    """Run the full spatial restoration and return ``(J, SpatialResult)``.

    `estimator`, when given, is called with the image and must return a
    TransmissionMap; it replaces the spectral-direction estimate, and
    ``SpatialResult.direction`` is then `None`.
    """
    img = check_image(img)
    if estimator is None:
        S = spectral_direction(img, patch_radius, operator)
        t = estimate_transmission(img, S)
    else:
        S = None
        t = estimator(img)
    A = estimate_atmospheric_light(img, t)
    J = invert_asm(img, t, A, gf_radius, gf_eps)
    return J, SpatialResult(direction=S, transmission=t, atmosphere=A)
