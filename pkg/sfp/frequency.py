#####################################################################
#                                                                   #
# /frequency.py                                                     #
#                                                                   #
# Copyright 2026, the sfp contributors                              #
#                                                                   #
# This file is part of the program sfp, and is licensed under the   #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Frequency-domain enhancement.

Each channel is multiplied in the Fourier domain by a radial mask
``M = alpha - exp(-(rho/beta)^2)``. ``alpha`` moves every channel's DC
component onto the mean DC of the three channels, which balances colour.
``beta`` is searched so that the share of spectral magnitude at very low
radial frequencies comes close to the level observed in clear images.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy import optimize
from labscript_utils import dedent

from .errors import DegenerateInput, NumericalError, ParamError
from .image_core import check_image, check_plane

logger = logging.getLogger(__name__)

RHO_NORMS = ('cycles', 'unit')
RHO_THRESH = 0.001
TARGET_PHI = 0.01
BETA_BOUNDS = (1e-4, 0.75)
BETA_TOL = 1e-4
MAX_EVALUATIONS = 200
SCAN_POINTS = 25
MIN_DC = 1e-4
IMAG_TOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    """Unshifted 2-D spectrum, scaled so that ``coeffs[0, 0]`` is the mean."""
    coeffs: np.ndarray

    @property
    def shape(self):
        return self.coeffs.shape

    @property
    def dc(self):
        return float(self.coeffs[0, 0].real)


@dataclass(frozen=True)
class RadialGrid:
    rho: np.ndarray
    rho_norm: str = 'cycles'

    def low_band(self, thresh=RHO_THRESH):
        """Boolean mask of bins with ``rho < thresh``.

        When only DC qualifies, DC and its 8 nearest bins are used instead.
        """
        band = self.rho < thresh
        if np.count_nonzero(band) <= 1:
            height, width = self.rho.shape
            band = np.zeros_like(band)
            for dv in (-1, 0, 1):
                for du in (-1, 0, 1):
                    band[dv % height, du % width] = True
        return band


@dataclass(frozen=True)
class FreqMask:
    values: np.ndarray
    alpha: float
    beta: float


@dataclass(frozen=True)
class BetaSearch:
    """Outcome of :func:`optimize_beta`."""
    beta: float
    objective: float
    phi: float
    at_bound: bool
    evaluations: int


@dataclass(frozen=True)
class FdpParams:
    """Per-channel parameters of a frequency enhancement, R/G/B order."""
    mu: float
    alpha: tuple
    beta: tuple
    beta_at_bound: tuple
    phi_before: tuple
    phi_after: tuple
    dc_after: tuple
    evaluations: tuple


def fft2(channel):
    """Forward 2-D FFT with ``1/(H*W)`` scaling, so DC equals the mean."""
    channel = check_plane(channel, 'channel')
    return Spectrum(coeffs=scipy.fft.fft2(channel, norm='forward'))


def ifft2(spectrum, tol=IMAG_TOL):
    """Inverse of :func:`fft2`, returning the real part.

    Raises:
        NumericalError: If any sample has an imaginary part above ``tol``,
            i.e. the spectrum was not conjugate symmetric.
    """
    samples = scipy.fft.ifft2(spectrum.coeffs, norm='forward')
    worst = float(np.max(np.abs(samples.imag))) if samples.size else 0.0
    if worst > tol:
        msg = """Inverse transform has imaginary parts up to {worst:.3g}
            (tolerance {tol:.3g}); the spectrum is not conjugate
            symmetric.""".format(worst=worst, tol=tol)
        raise NumericalError(dedent(msg))
    return np.ascontiguousarray(samples.real)


def radial_grid(height, width, rho_norm='cycles'):
    """Radial frequency of every bin of an unshifted ``height x width`` grid.

    With ``rho_norm='cycles'`` the signed bin indices are divided by the axis
    length, giving ``rho`` in ``[0, sqrt(2)/2]``. ``'unit'`` rescales that to
    ``[0, 1]``.
    """
    if rho_norm not in RHO_NORMS:
        msg = """Unknown rho_norm {norm!r}; expected one of
            {norms}.""".format(norm=rho_norm, norms=RHO_NORMS)
        raise ParamError(dedent(msg))
    v = scipy.fft.fftfreq(height)[:, np.newaxis]
    u = scipy.fft.fftfreq(width)[np.newaxis, :]
    rho = np.sqrt(u ** 2 + v ** 2)
    if rho_norm == 'unit':
        rho = rho / (np.sqrt(2.0) / 2.0)
    return RadialGrid(rho=rho, rho_norm=rho_norm)


def channel_dcs(img):
    img = check_image(img)
    return np.array([fft2(img[..., c]).dc for c in range(3)])


def _alpha_from_dcs(dcs):
    dcs = np.asarray(dcs, dtype=np.float64)
    if dcs.min() < MIN_DC:
        msg = """Channel means {dcs} include a near-black channel (below
            {floor}); the colour balance gain is undefined.""".format(
            dcs=np.round(dcs, 6).tolist(), floor=MIN_DC
        )
        raise DegenerateInput(dedent(msg))
    mu = dcs.sum() / 3.0
    return mu / dcs + 1.0, mu


def alpha_from_dc(img):
    """Per-channel mask gain ``alpha_C = mu / DC_C + 1``.

    ``mu`` is the mean of the three DC components.

    Raises:
        DegenerateInput: If a channel mean is below 1e-4.
    """
    alpha, _ = _alpha_from_dcs(channel_dcs(img))
    return alpha


def build_mask(width, height, alpha, beta, rho_norm='cycles'):
    """Evaluate ``alpha - exp(-(rho/beta)^2)`` on the radial grid.

    Raises:
        ParamError: If ``beta <= 0`` or ``alpha < 1``.
    """
    if not beta > 0:
        raise ParamError("beta must be > 0, got %r." % beta)
    if not alpha >= 1:
        raise ParamError("alpha must be >= 1, got %r." % alpha)
    grid = radial_grid(height, width, rho_norm)
    values = alpha - np.exp(-(grid.rho / beta) ** 2)
    return FreqMask(values=values, alpha=float(alpha), beta=float(beta))


def low_freq_percentage(spectrum, thresh=RHO_THRESH, rho_norm='cycles'):
    """Share of total spectral magnitude in bins with ``rho < thresh``.

    DC is part of the numerator.

    Raises:
        DegenerateInput: If the spectrum is identically zero.
    """
    magnitude = np.abs(spectrum.coeffs)
    total = magnitude.sum()
    if not total > 0:
        raise DegenerateInput("Spectrum is identically zero.")
    band = radial_grid(*magnitude.shape, rho_norm=rho_norm).low_band(thresh)
    return float(magnitude[band].sum() / total)


class LowFrequencyObjective(object):
    """``g(beta) = |phi(mask(beta) * F) - target|`` for one channel.

    ``phi`` is evaluated on the masked spectrum directly. Every call is
    counted in ``evaluations``.
    """
    def __init__(self, spectrum, alpha, target=TARGET_PHI, thresh=RHO_THRESH,
                 rho_norm='cycles'):
        self.magnitude = np.abs(spectrum.coeffs)
        if not self.magnitude.sum() > 0:
            raise DegenerateInput("Spectrum is identically zero.")
        grid = radial_grid(*self.magnitude.shape, rho_norm=rho_norm)
        self.band = grid.low_band(thresh)
        self.rho_squared = grid.rho ** 2
        self.alpha = float(alpha)
        self.target = float(target)
        self.evaluations = 0
        self.last_phi = None

    def phi(self, beta):
        # alpha >= 1 keeps the mask non-negative, so |F * M| = |F| * M.
        weighted = self.magnitude * (
            self.alpha - np.exp(-self.rho_squared / beta ** 2)
        )
        total = weighted.sum()
        if not total > 0:
            return 1.0
        return float(weighted[self.band].sum() / total)

    def __call__(self, beta):
        self.evaluations += 1
        self.last_phi = self.phi(beta)
        return abs(self.last_phi - self.target)


def _brackets(scan, values, signs):
    """Scan intervals worth refining, best scan point first.

    ``signs`` holds the sign of ``phi - target`` at every scan point; an
    interval where it flips contains a root of the objective.
    """
    best = int(np.argmin(values))
    brackets = [(scan[max(best - 1, 0)], scan[min(best + 1, len(scan) - 1)])]
    for i in np.flatnonzero(signs[:-1] * signs[1:] < 0):
        bracket = (scan[i], scan[i + 1])
        if not brackets[0][0] <= bracket[0] < bracket[1] <= brackets[0][1]:
            brackets.append(bracket)
    return brackets


def _search(objective, bounds, tol, max_evaluations):
    lo, hi = bounds
    scan = np.geomspace(lo, hi, SCAN_POINTS)
    scan[0], scan[-1] = lo, hi
    values = np.empty(SCAN_POINTS)
    signs = np.empty(SCAN_POINTS)
    for i, beta in enumerate(scan):
        values[i] = objective(beta)
        signs[i] = np.sign(objective.last_phi - objective.target)
    best = int(np.argmin(values))
    beta, value = float(scan[best]), float(values[best])

    for left, right in _brackets(scan, values, signs):
        # The bounded method may spend one call beyond maxiter when it is 1.
        budget = max_evaluations - objective.evaluations
        if budget < 2:
            break
        result = optimize.minimize_scalar(
            objective,
            bounds=(left, right),
            method='bounded',
            options={'xatol': tol * (hi - lo), 'maxiter': budget},
        )
        # Keep the scan point unless refinement strictly improves on it.
        if result.fun < value:
            beta, value = float(result.x), float(result.fun)
    return beta, value


def optimize_beta(channel, alpha, target=TARGET_PHI, tol=BETA_TOL,
                  bounds=BETA_BOUNDS, thresh=RHO_THRESH, rho_norm='cycles',
                  max_evaluations=MAX_EVALUATIONS):
    """Find the mask width that brings the low-frequency share to ``target``.

    Minimises ``|phi(beta) - target|`` over ``bounds``. A coarse geometric scan
    brackets the minimum, then bounded Brent minimisation refines it inside
    the bracket and inside every scan interval where ``phi`` crosses
    ``target``. Objective calls never exceed ``max_evaluations``.

    Args:
        channel (:obj:`numpy:numpy.ndarray`): 2-D channel.
        alpha (float): Mask gain, ``>= 1``.
        target (float, optional): Target share. Defaults to 0.01.
        tol (float, optional): Termination width as a fraction of the bound
            range. Defaults to 1e-4.
        bounds (tuple, optional): Search interval. Defaults to
            ``(1e-4, 0.75)``.
        thresh (float, optional): Radial threshold of the low band.
        rho_norm (str, optional): Radial normalisation.
        max_evaluations (int, optional): Evaluation budget.

    Returns:
        BetaSearch: The chosen ``beta`` and its diagnostics. ``at_bound`` is
        `True` when the result sits on either end of ``bounds``.
    """
    return _optimize_spectrum(
        fft2(channel), alpha, target, tol, bounds, thresh, rho_norm,
        max_evaluations
    )


def _optimize_spectrum(spectrum, alpha, target, tol, bounds, thresh, rho_norm,
                       max_evaluations):
    lo, hi = bounds
    if not 0 < lo < hi:
        raise ParamError("beta bounds must satisfy 0 < lo < hi, got %r." %
                         (bounds,))
    if not alpha >= 1:
        raise ParamError("alpha must be >= 1, got %r." % alpha)
    if max_evaluations < SCAN_POINTS:
        raise ParamError("max_evaluations must be >= %d." % SCAN_POINTS)
    objective = LowFrequencyObjective(spectrum, alpha, target, thresh,
                                      rho_norm)
    beta, value = _search(objective, (lo, hi), tol, max_evaluations)
    at_bound = beta <= lo or beta >= hi
    if at_bound:
        logger.warning('beta search ended on bound %.4g (objective %.4g)',
                       beta, value)
    return BetaSearch(
        beta=beta,
        objective=value,
        phi=objective.phi(beta),
        at_bound=bool(at_bound),
        evaluations=objective.evaluations,
    )


def enhance(img, target=TARGET_PHI, tol=BETA_TOL, bounds=BETA_BOUNDS,
            thresh=RHO_THRESH, rho_norm='cycles'):
    """Apply the adaptive frequency mask to every channel.

    Args:
        img (:obj:`numpy:numpy.ndarray`): ``(H, W, 3)`` image.

    Returns:
        tuple: ``(enhanced, FdpParams)``. ``enhanced`` is clamped to
        ``[0, 1]``; ``FdpParams.dc_after`` holds the DC of each channel before
        clamping.

    Raises:
        DegenerateInput: If a channel mean is below 1e-4.
    """
    img = check_image(img)
    height, width = img.shape[:2]
    spectra = [fft2(img[..., c]) for c in range(3)]
    alpha, mu = _alpha_from_dcs([s.dc for s in spectra])

    channels = []
    searches = []
    phi_before = []
    dc_after = []
    for c, spectrum in enumerate(spectra):
        search = _optimize_spectrum(spectrum, alpha[c], target, tol, bounds,
                                    thresh, rho_norm, MAX_EVALUATIONS)
        mask = build_mask(width, height, alpha[c], search.beta, rho_norm)
        enhanced = ifft2(Spectrum(coeffs=spectrum.coeffs * mask.values))
        channels.append(enhanced)
        searches.append(search)
        phi_before.append(low_freq_percentage(spectrum, thresh, rho_norm))
        dc_after.append(fft2(enhanced).dc)
        logger.debug('Channel %s: alpha %.4f beta %.5f phi %.4f -> %.4f',
                     'RGB'[c], alpha[c], search.beta, phi_before[-1],
                     search.phi)

    params = FdpParams(
        mu=float(mu),
        alpha=tuple(float(a) for a in alpha),
        beta=tuple(s.beta for s in searches),
        beta_at_bound=tuple(s.at_bound for s in searches),
        phi_before=tuple(phi_before),
        phi_after=tuple(s.phi for s in searches),
        dc_after=tuple(dc_after),
        evaluations=tuple(s.evaluations for s in searches),
    )
    return np.clip(np.stack(channels, axis=-1), 0.0, 1.0), params
