#####################################################################
#                                                                   #
# /image_core.py                                                    #
#                                                                   #
# Copyright 2026, the sfp contributors                              #
#                                                                   #
# This file is part of the program sfp, and is licensed under the   #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Image containers, raster I/O and colour conversions.

Images are ``(H, W, 3)`` float64 numpy arrays holding R, G, B planes in
``[0, 1]``. Scalar maps (transmission, luminance, masks) are 2-D float64
arrays.
"""
import os
import logging

import cv2
import numpy as np
from labscript_utils import dedent

from .errors import DimensionError, FormatError, ImageIOError, ParamError

logger = logging.getLogger(__name__)

MIN_SIZE = 8
IMAGE_EXTENSIONS = ('.png', '.jpg', '.jpeg')

REC709_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])

# Linear sRGB -> CIE XYZ, D65 white.
_RGB_TO_XYZ = np.array([
    [0.4124, 0.3576, 0.1805],
    [0.2126, 0.7152, 0.0722],
    [0.0193, 0.1192, 0.9505],
])
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
# Reference white is the image of RGB (1, 1, 1) so white maps to a = b = 0.
_WHITE = _RGB_TO_XYZ.sum(axis=1)

_SRGB_KNEE = 0.04045
_LINEAR_KNEE = _SRGB_KNEE / 12.92
_LAB_DELTA = 6.0 / 29.0


def check_image(img, name='image'):
    """Validate a planar RGB image and return it as a float64 array.

    Args:
        img (array_like): ``(H, W, 3)`` array with samples in ``[0, 1]``.
        name (str, optional): Name used in error messages.

    Returns:
        :obj:`numpy:numpy.ndarray`: The image as float64.

    Raises:
        DimensionError: If the shape is not ``(H, W, 3)`` with ``H, W >= 8``.
        ParamError: If a sample is not finite or lies outside ``[0, 1]``.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        msg = """{name} must have shape (H, W, 3), got {shape}.""".format(
            name=name, shape=img.shape
        )
        raise DimensionError(dedent(msg))
    _check_size(img.shape[0], img.shape[1], name)
    if not np.all(np.isfinite(img)):
        raise ParamError("%s contains NaN or Inf samples." % name)
    if img.min() < 0 or img.max() > 1:
        msg = """{name} samples must lie in [0, 1], got range [{lo}, {hi}].
            Clamp explicitly before passing the image on.""".format(
            name=name, lo=img.min(), hi=img.max()
        )
        raise ParamError(dedent(msg))
    return img


def check_plane(plane, name='plane', shape=None):
    """Validate a finite 2-D scalar map, optionally against a shape."""
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2:
        raise DimensionError(
            "%s must be a 2-D array, got shape %s." % (name, plane.shape)
        )
    if shape is not None and plane.shape != tuple(shape):
        msg = """{name} has shape {got} but {want} was expected.""".format(
            name=name, got=plane.shape, want=tuple(shape)
        )
        raise DimensionError(dedent(msg))
    if not np.all(np.isfinite(plane)):
        raise ParamError("%s contains NaN or Inf values." % name)
    return plane


def _check_size(height, width, name):
    if height < MIN_SIZE or width < MIN_SIZE:
        msg = """{name} is {h}x{w} pixels; at least {n}x{n} is
            required.""".format(name=name, h=height, w=width, n=MIN_SIZE)
        raise DimensionError(dedent(msg))


def load_image(path):
    """Read a PNG or JPEG file into a planar RGB image.

    8- and 16-bit rasters are scaled by their maximum code value. Grayscale
    rasters are replicated to three planes and an alpha plane is dropped.

    Args:
        path (str or path-like): File to read.

    Returns:
        :obj:`numpy:numpy.ndarray`: ``(H, W, 3)`` float64 image in ``[0, 1]``.

    Raises:
        ImageIOError: If the file cannot be read.
        FormatError: If the content is not a decodable 8/16-bit raster.
        DimensionError: If the raster is smaller than 8x8.
    """
    path = os.fspath(path)
    try:
        # np.fromfile + imdecode keeps non-ASCII paths working and separates
        # read failures from decode failures.
        raw = np.fromfile(path, dtype=np.uint8)
    except OSError as e:
        raise ImageIOError("Cannot read image file %r: %s" % (path, e)) from e
    if raw.size == 0:
        raise FormatError("Image file %r is empty." % path)
    try:
        decoded = cv2.imdecode(raw, cv2.IMREAD_UNCHANGED)
    except cv2.error as e:
        raise FormatError("Cannot decode image file %r: %s" % (path, e)) from e
    if decoded is None:
        raise FormatError("Cannot decode image file %r." % path)

    if decoded.dtype == np.uint8:
        max_code = 255.0
    elif decoded.dtype == np.uint16:
        max_code = 65535.0
    else:
        msg = """Image file {path!r} has unsupported sample type {dtype};
            only 8- and 16-bit rasters are read.""".format(
            path=path, dtype=decoded.dtype
        )
        raise FormatError(dedent(msg))

    if decoded.ndim == 2:
        decoded = np.repeat(decoded[:, :, np.newaxis], 3, axis=2)
    elif decoded.shape[2] == 1:
        decoded = np.repeat(decoded, 3, axis=2)
    else:
        # OpenCV stores BGR(A).
        decoded = decoded[:, :, 2::-1]
    _check_size(decoded.shape[0], decoded.shape[1], path)
    img = np.ascontiguousarray(decoded, dtype=np.float64) / max_code
    logger.debug('Loaded %s (%dx%d, %d-bit)', path, img.shape[1],
                 img.shape[0], 8 if max_code == 255.0 else 16)
    return img


def quantize(img):
    """Quantize to 8-bit codes with round-half-up, ``floor(s*255 + 0.5)``."""
    img = check_image(img)
    return np.floor(img * 255.0 + 0.5).astype(np.uint8)


def save_image(img, path):
    """Write a planar RGB image as an 8-bit PNG.

    Raises:
        ImageIOError: If the file cannot be written.
    """
    path = os.fspath(path)
    codes = quantize(img)
    ok, buf = cv2.imencode('.png', np.ascontiguousarray(codes[:, :, ::-1]))
    if not ok:
        raise ImageIOError("Cannot encode PNG for %r." % path)
    try:
        buf.tofile(path)
    except OSError as e:
        raise ImageIOError("Cannot write image file %r: %s" % (path, e)) from e
    logger.debug('Saved %s', path)


def plane_to_image(plane):
    """Replicate a ``[0, 1]`` scalar map to three planes for saving."""
    plane = check_plane(plane)
    return np.repeat(np.clip(plane, 0.0, 1.0)[:, :, np.newaxis], 3, axis=2)


def luminance(img):
    """Rec. 709 weighted sum of the R, G, B planes."""
    img = np.asarray(img, dtype=np.float64)
    return img @ REC709_WEIGHTS


def srgb_to_linear(s):
    s = np.asarray(s, dtype=np.float64)
    curved = ((np.maximum(s, _SRGB_KNEE) + 0.055) / 1.055) ** 2.4
    return np.where(s <= _SRGB_KNEE, s / 12.92, curved)


def linear_to_srgb(lin):
    lin = np.asarray(lin, dtype=np.float64)
    curved = 1.055 * np.maximum(lin, _LINEAR_KNEE) ** (1 / 2.4) - 0.055
    return np.where(lin <= _LINEAR_KNEE, lin * 12.92, curved)


def _lab_f(t):
    return np.where(
        t > _LAB_DELTA ** 3,
        np.cbrt(t),
        t / (3 * _LAB_DELTA ** 2) + 4.0 / 29.0,
    )


def _lab_f_inv(f):
    return np.where(
        f > _LAB_DELTA,
        f ** 3,
        3 * _LAB_DELTA ** 2 * (f - 4.0 / 29.0),
    )


def rgb_to_lab(img):
    """Convert sRGB to CIE L*a*b* (D65, 2 degree observer).

    Returns:
        :obj:`numpy:numpy.ndarray`: ``(H, W, 3)`` array of L, a, b planes.
    """
    img = np.asarray(img, dtype=np.float64)
    xyz = srgb_to_linear(img) @ _RGB_TO_XYZ.T
    f = _lab_f(xyz / _WHITE)
    L = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([L, a, b], axis=-1)


def lab_to_rgb(lab, clip=True):
    """Inverse of :func:`rgb_to_lab`.

    Out-of-gamut colours are clamped to ``[0, 1]`` unless ``clip`` is False.
    """
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = _lab_f_inv(np.stack([fx, fy, fz], axis=-1)) * _WHITE
    rgb = linear_to_srgb(xyz @ _XYZ_TO_RGB.T)
    if not clip:
        return rgb
    return np.clip(rgb, 0.0, 1.0)
