#####################################################################
#                                                                   #
# /pipeline.py                                                      #
#                                                                   #
# Copyright 2026, the sfp contributors                              #
#                                                                   #
# This file is part of the program sfp, and is licensed under the   #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Pipeline composition, configuration, reports and the batch drivers.

The pipeline restores the input in the spatial domain (``J``), enhances it in
the frequency domain (``E``), fuses ``I``, ``J`` and ``E`` in Lab space and
tone-maps the result. Each stage can be switched off for ablation.
"""
import json
import time
import logging
import dataclasses
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pandas
from labscript_utils import dedent

from .dataframe_utilities import (flatten_dict, join_keys, rows_to_dataframe,
                                  write_csv)
from .errors import (ConfigError, ImageIOError, NumericalError, ParamError,
                     SFPError)
from .frequency import RHO_NORMS, enhance
from .fusion import SOURCES, fuse
from .image_core import (IMAGE_EXTENSIONS, check_image, load_image,
                         plane_to_image, save_image)
from .metrics import UCIQE_COEFFS, psnr, uciqe
from .oracle import (dark_channel_baseline, dc_difference_stats, haze_pairs,
                     radial_stats, synthesize_haze, synthetic_corpus,
                     transmission_stats)
from .results_file import ResultsFile
from .spatial import GRADIENT_OPERATORS, restore, transmission_from_values

logger = logging.getLogger(__name__)

TRANSMISSION_ESTIMATORS = ('sdp', 'dcp')
STATS_MODES = ('dc-diff', 'radial', 'transmission-mse', 'ablation')
CHANNELS = ('R', 'G', 'B')
STAGES = ('spatial', 'frequency', 'fusion', 'total')

ABLATION_ARMS = (
    ('full', {}),
    ('no-sdp', {'no_sdp': True}),
    ('no-fdp', {'no_fdp': True}),
    ('naive-fusion', {'naive_fusion': True}),
    ('no-pp', {'no_pp': True}),
)

STAGE_SWITCHES = ('no_sdp', 'no_fdp', 'naive_fusion', 'no_pp')

_FLAGS = ('no_sdp', 'no_fdp', 'naive_fusion', 'no_pp', 'night',
          'emit_intermediate', 'emit_h5', 'timings')


@dataclasses.dataclass(frozen=True)
class PipelineConfig:
    """Settings of one pipeline run. Every instance is validated.

    Raises:
        ConfigError: If a value is out of range or of the wrong type.
    """
    patch_radius: int = 7
    gf_radius: int = 16
    gf_eps: float = 1e-3
    gradient: str = 'magnitude'
    transmission: str = 'sdp'
    rho_norm: str = 'cycles'
    rho_thresh: float = 0.001
    target_phi: float = 0.01
    beta_lo: float = 1e-4
    beta_hi: float = 0.75
    beta_tol: float = 1e-4
    no_sdp: bool = False
    no_fdp: bool = False
    naive_fusion: bool = False
    no_pp: bool = False
    night: bool = False
    emit_intermediate: bool = False
    emit_h5: bool = False
    timings: bool = False
    threads: int = 1
    uciqe_coeffs: tuple = UCIQE_COEFFS

    def __post_init__(self):
        coeffs = self.uciqe_coeffs
        if isinstance(coeffs, (list, tuple)):
            object.__setattr__(self, 'uciqe_coeffs', tuple(coeffs))
        self.validate()

    def validate(self):
        problems = []
        for name in ('patch_radius', 'gf_radius', 'threads'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or \
                    value < 1:
                problems.append('%s must be an integer >= 1, got %r' %
                                (name, value))
        for name in ('gf_eps', 'beta_lo', 'beta_hi', 'beta_tol'):
            value = getattr(self, name)
            if not _is_number(value) or not value > 0:
                problems.append('%s must be a number > 0, got %r' %
                                (name, value))
        for name in ('rho_thresh', 'target_phi'):
            value = getattr(self, name)
            if not _is_number(value) or not 0 < value < 1:
                problems.append('%s must be a number in (0, 1), got %r' %
                                (name, value))
        if _is_number(self.beta_lo) and _is_number(self.beta_hi) and \
                not self.beta_lo < self.beta_hi:
            problems.append('beta_lo must be below beta_hi')
        for name, choices in (('gradient', GRADIENT_OPERATORS),
                              ('transmission', TRANSMISSION_ESTIMATORS),
                              ('rho_norm', RHO_NORMS)):
            if getattr(self, name) not in choices:
                problems.append('%s must be one of %s, got %r' %
                                (name, choices, getattr(self, name)))
        for name in _FLAGS:
            if not isinstance(getattr(self, name), bool):
                problems.append('%s must be true or false, got %r' %
                                (name, getattr(self, name)))
        coeffs = self.uciqe_coeffs
        if not isinstance(coeffs, tuple) or len(coeffs) != 3 or \
                not all(_is_number(c) for c in coeffs):
            problems.append('uciqe_coeffs must be three numbers, got %r' %
                            (coeffs,))
        if problems:
            msg = """Invalid pipeline configuration:
                {problems}""".format(problems='; '.join(problems))
            raise ConfigError(dedent(msg))

    @classmethod
    def from_dict(cls, settings):
        """Build a config from a mapping, rejecting unknown keys."""
        if not isinstance(settings, dict):
            raise ConfigError("Configuration must be a JSON object.")
        known = {field.name for field in dataclasses.fields(cls)}
        unknown = sorted(set(settings) - known)
        if unknown:
            msg = """Unknown configuration keys: {unknown}. Valid keys are
                {known}.""".format(unknown=', '.join(unknown),
                                   known=', '.join(sorted(known)))
            raise ConfigError(dedent(msg))
        return cls(**settings)

    @classmethod
    def from_file(cls, path):
        """Read a JSON object of settings from `path`."""
        try:
            with open(path, 'r', encoding='utf-8') as f:
                settings = json.load(f)
        except OSError as e:
            raise ConfigError("Cannot read config file %r: %s" % (path, e))
        except ValueError as e:
            raise ConfigError("Config file %r is not valid JSON: %s" %
                              (path, e))
        return cls.from_dict(settings)

    def updated(self, **overrides):
        """Copy with the given non-None values replaced."""
        overrides = {k: v for k, v in overrides.items() if v is not None}
        known = {field.name for field in dataclasses.fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ConfigError("Unknown configuration keys: %s." %
                              ', '.join(unknown))
        return dataclasses.replace(self, **overrides)

    def to_dict(self):
        settings = dataclasses.asdict(self)
        settings['uciqe_coeffs'] = list(self.uciqe_coeffs)
        return settings


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) \
        and np.isfinite(value)


def _per_channel(values):
    if values is None:
        return {channel: None for channel in CHANNELS}
    return {channel: _plain(v) for channel, v in zip(CHANNELS, values)}


def _plain(value):
    if value is None:
        return None
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    return float(value)


class RecoveryReport(object):
    """Per-image record of the estimated quantities.

    Stages that did not run leave their fields as `None`, so :meth:`to_dict`
    always has the same keys in the same order.
    """
    def __init__(self, input=None, width=None, height=None, config=None):
        self.input = input
        self.width = width
        self.height = height
        self.config = config
        self.spatial = None
        self.frequency = None
        self.fusion = None
        self.uciqe_input = None
        self.uciqe_output = None
        self.timings = None

    def to_dict(self):
        config = self.config
        spatial = self.spatial
        frequency = self.frequency
        fusion = self.fusion
        if spatial is not None:
            transmission = spatial.transmission.stats
            atmosphere = spatial.atmosphere.A
            degenerate = spatial.direction.degenerate \
                if spatial.direction is not None else False
        else:
            transmission = dict.fromkeys(('min', 'mean', 't_min'))
            atmosphere = None
            degenerate = None
        if fusion is not None and fusion.weights is not None:
            weights = fusion.weights.to_dict()
        else:
            weights = {source: {'a': None, 'b': None} for source in SOURCES}
        tone = fusion.tone if fusion is not None else None
        timings = self.timings or {}

        def freq(name):
            return getattr(frequency, name) if frequency is not None else None

        return {
            'input': self.input,
            'width': _plain(self.width),
            'height': _plain(self.height),
            'config': {
                'transmission': config.transmission if config else None,
                'no_sdp': config.no_sdp if config else None,
                'no_fdp': config.no_fdp if config else None,
                'naive_fusion': config.naive_fusion if config else None,
                'no_pp': config.no_pp if config else None,
                'night': config.night if config else None,
            },
            'spatial': {
                'degenerate': degenerate,
                'atmosphere': _per_channel(atmosphere),
                'transmission': {k: _plain(v)
                                 for k, v in transmission.items()},
            },
            'frequency': {
                'mu': _plain(freq('mu')),
                'alpha': _per_channel(freq('alpha')),
                'beta': _per_channel(freq('beta')),
                'beta_at_bound': _per_channel(freq('beta_at_bound')),
                'phi_before': _per_channel(freq('phi_before')),
                'phi_after': _per_channel(freq('phi_after')),
                'dc_after': _per_channel(freq('dc_after')),
                'evaluations': _per_channel(freq('evaluations')),
            },
            'fusion': {
                'weights': weights,
                'gamma': _plain(tone.gamma) if tone else None,
                'white': _plain(tone.white) if tone else None,
            },
            'quality': {
                'uciqe_input': _plain(self.uciqe_input),
                'uciqe_output': _plain(self.uciqe_output),
            },
            'timings': {stage: _plain(timings.get(stage))
                        for stage in STAGES},
        }

    def to_json(self):
        """Indented JSON with a fixed key order.

        Raises:
            NumericalError: If a value is NaN or infinite.
        """
        try:
            return json.dumps(self.to_dict(), indent=2, allow_nan=False) + '\n'
        except ValueError as e:
            raise NumericalError("Report holds a non-finite value: %s" % e)

    def summary_row(self, errors=''):
        """Flat row for ``summary.csv``: input, errors, then dotted keys."""
        flat = join_keys(flatten_dict(self.to_dict()))
        row = {'input': flat.pop('input'), 'errors': errors}
        row.update(flat)
        return row


SUMMARY_COLUMNS = list(RecoveryReport().summary_row())


class _Stopwatch(object):
    def __init__(self, enabled):
        self.enabled = enabled
        self.timings = {}

    @contextmanager
    def __call__(self, stage):
        start = time.perf_counter()
        try:
            yield
        finally:
            if self.enabled:
                self.timings[stage] = time.perf_counter() - start


def _transmission_estimator(config):
    if config.transmission == 'dcp':
        return lambda img: transmission_from_values(
            dark_channel_baseline(img, config.patch_radius)
        )
    return None


def recover(img, config=None):
    """Run the pipeline on an in-memory image.

    Args:
        img (:obj:`numpy:numpy.ndarray`): ``(H, W, 3)`` image in ``[0, 1]``.
        config (PipelineConfig, optional): Settings; defaults are used when
            `None`.

    Returns:
        tuple: ``(output, RecoveryReport, intermediates)`` where
        `intermediates` maps ``'transmission'``, ``'sdp'`` and ``'fdp'`` to the
        arrays of the stages that ran.
    """
    config = config or PipelineConfig()
    img = check_image(img)
    report = RecoveryReport(width=img.shape[1], height=img.shape[0],
                            config=config)
    intermediates = {}
    clock = _Stopwatch(config.timings)
    if config.night:
        logger.warning('Night mode runs the daytime pipeline.')

    with clock('total'):
        J = img
        if not config.no_sdp:
            with clock('spatial'):
                J, spatial = restore(
                    img, config.patch_radius, config.gf_radius, config.gf_eps,
                    config.gradient, _transmission_estimator(config),
                )
            report.spatial = spatial
            intermediates['transmission'] = spatial.transmission.values
            intermediates['sdp'] = J
        E = img
        if not config.no_fdp:
            with clock('frequency'):
                E, fdp = enhance(
                    img, config.target_phi, config.beta_tol,
                    (config.beta_lo, config.beta_hi), config.rho_thresh,
                    config.rho_norm,
                )
            report.frequency = fdp
            intermediates['fdp'] = E
        with clock('fusion'):
            output, fusion = fuse(img, J, E, weighted=not config.naive_fusion,
                                  post=not config.no_pp)
        report.fusion = fusion

    report.uciqe_input = uciqe(img, config.uciqe_coeffs)
    report.uciqe_output = uciqe(output, config.uciqe_coeffs)
    if config.timings:
        report.timings = clock.timings
    return output, report, intermediates


def _ensure_dir(path):
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ImageIOError("Cannot create output directory %r: %s" %
                           (str(path), e))
    return path


def _write_text(path, text):
    try:
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
    except OSError as e:
        raise ImageIOError("Cannot write %r: %s" % (str(path), e))


def _save_results_file(path, report, intermediates, output):
    try:
        results = ResultsFile(path, group='recovery')
        for name in ('transmission', 'sdp', 'fdp'):
            if name in intermediates:
                results.save_result_array(name, intermediates[name])
        results.save_result_array('output', output)
        flat = join_keys(flatten_dict(report.to_dict()))
        results.save_results_dict(flat)
    except OSError as e:
        raise ImageIOError("Cannot write results file %r: %s" %
                           (str(path), e)) from e


def run_single(input_path, config=None, outdir='.', name=None):
    """Recover one image file.

    Writes ``<name>.sfp.png`` and ``<name>.json`` into `outdir`; with
    ``emit_intermediate`` also ``<name>.t.png``, ``<name>.sdp.png`` and
    ``<name>.fdp.png`` for the stages that ran; with ``emit_h5`` also
    ``<name>.h5``. `name` defaults to the stem of `input_path`.

    Returns:
        RecoveryReport: The report that was written.
    """
    config = config or PipelineConfig()
    input_path = Path(input_path)
    outdir = _ensure_dir(outdir)
    stem = name or input_path.stem
    img = load_image(input_path)
    output, report, intermediates = recover(img, config)
    report.input = str(input_path)

    save_image(output, outdir / (stem + '.sfp.png'))
    if config.emit_intermediate:
        if 'transmission' in intermediates:
            save_image(plane_to_image(intermediates['transmission']),
                       outdir / (stem + '.t.png'))
        for stage in ('sdp', 'fdp'):
            if stage in intermediates:
                save_image(intermediates[stage],
                           outdir / ('%s.%s.png' % (stem, stage)))
    if config.emit_h5:
        _save_results_file(outdir / (stem + '.h5'), report, intermediates,
                           output)
    _write_text(outdir / (stem + '.json'), report.to_json())
    logger.info('Recovered %s -> %s', input_path, outdir / (stem + '.sfp.png'))
    return report


def image_paths(directory):
    """Sorted image files (by extension) directly inside `directory`."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ImageIOError("%r is not a directory." % str(directory))
    return sorted(p for p in directory.iterdir()
                  if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS)


def output_names(paths):
    """Output base name for each path.

    The stem, unless another path shares it (case-insensitively), in which
    case the full file name: ``x.png`` and ``x.jpg`` write ``x.png.sfp.png``
    and ``x.jpg.sfp.png``.
    """
    stems = Counter(p.stem.casefold() for p in paths)
    return [p.name if stems[p.stem.casefold()] > 1 else p.stem for p in paths]


def _one_line(error):
    return '%s: %s' % (type(error).__name__, ' '.join(str(error).split()))


def run_batch(indir, config=None, outdir='.'):
    """Recover every image in `indir` and write ``summary.csv``.

    Files are processed on a pool of ``config.threads`` workers. A file that
    fails is logged and gets a row with its error in the ``errors`` column.

    Returns:
        :obj:`pandas:pandas.DataFrame`: The summary, one row per file in
        sorted order.
    """
    config = config or PipelineConfig()
    paths = image_paths(indir)
    outdir = _ensure_dir(outdir)
    names = output_names(paths)
    taken = Counter(name.casefold() for name in names)
    for path, name in zip(paths, names):
        if name != path.stem:
            logger.warning('%s shares its stem with another input; writing '
                           '%s.sfp.png', path, name)

    def process(job):
        path, name = job
        try:
            if taken[name.casefold()] > 1:
                raise ImageIOError(
                    "Output name %r is claimed by more than one input." % name
                )
            return run_single(path, config, outdir, name).summary_row()
        except SFPError as e:
            logger.error('Failed to recover %s: %s', path, e)
            return RecoveryReport(input=str(path)).summary_row(
                errors=_one_line(e)
            )

    with ThreadPoolExecutor(max_workers=config.threads) as executor:
        rows = list(executor.map(process, zip(paths, names)))
    summary = rows_to_dataframe(rows, SUMMARY_COLUMNS)
    write_csv(summary, outdir / 'summary.csv')
    failed = int((summary['errors'] != '').sum())
    logger.info('Batch finished: %d recovered, %d failed', len(rows) - failed,
                failed)
    return summary


def load_pairs(degraded_dir, clean_dir):
    """Load ``(degraded, clean)`` pairs matched by file stem."""
    clean = {p.stem: p for p in image_paths(clean_dir)}
    pairs = []
    for path in image_paths(degraded_dir):
        if path.stem not in clean:
            logger.warning('No clean image matches %s; skipped', path)
            continue
        pairs.append((load_image(path), load_image(clean[path.stem])))
    return pairs


def ablation_stats(scenes, config=None, threads=1):
    """PSNR and UCIQE of every ablation arm on synthetic scenes.

    Besides the arms, rows ``input``, ``sdp-only`` and ``fdp-only`` score the
    degraded image and the two intermediates of the full run.

    Returns:
        :obj:`pandas:pandas.DataFrame`: Columns ``scene, arm, psnr, uciqe``.
    """
    config = config or PipelineConfig()
    ignored = [name for name in STAGE_SWITCHES if getattr(config, name)]
    if ignored:
        logger.warning('Ablation arms set their own stage switches; '
                       'ignoring %s', ', '.join(ignored))
    config = config.updated(**{name: False for name in STAGE_SWITCHES})

    def evaluate(indexed):
        index, scene = indexed
        candidates = [('input', scene.degraded)]
        for arm, overrides in ABLATION_ARMS:
            output, _, intermediates = recover(scene.degraded,
                                               config.updated(**overrides))
            candidates.append((arm, output))
            if arm == 'full':
                candidates.append(('sdp-only', intermediates['sdp']))
                candidates.append(('fdp-only', intermediates['fdp']))
        return [
            {'scene': index, 'arm': arm,
             'psnr': psnr(img, scene.clean),
             'uciqe': uciqe(img, config.uciqe_coeffs)}
            for arm, img in candidates
        ]

    with ThreadPoolExecutor(max_workers=threads) as executor:
        groups = list(executor.map(evaluate, enumerate(scenes)))
    rows = [row for group in groups for row in group]
    return pandas.DataFrame(rows, columns=['scene', 'arm', 'psnr', 'uciqe'])


def run_stats(mode, config=None, pairs=None, images=None, count=None,
              size=None, seed=0):
    """Compute one of the prior statistics tables.

    Args:
        mode (str): ``'dc-diff'``, ``'radial'``, ``'transmission-mse'`` or
            ``'ablation'``.
        config (PipelineConfig, optional): Supplies patch radius, gradient
            operator, radial settings and thread count.
        pairs (list, optional): ``(degraded, clean)`` pairs for
            ``'dc-diff'``. A synthetic set is generated when `None`.
        images (list, optional): Images for ``'radial'``. Synthetic clean
            and hazy scenes are used when `None`.
        count (int, optional): Size of a synthetic corpus.
        size (int, optional): Side length of synthetic images.
        seed (int, optional): Corpus seed.

    Returns:
        :obj:`pandas:pandas.DataFrame`: The statistics table.
    """
    config = config or PipelineConfig()
    if mode not in STATS_MODES:
        msg = """Unknown statistics mode {mode!r}; expected one of
            {modes}.""".format(mode=mode, modes=STATS_MODES)
        raise ParamError(dedent(msg))

    if mode == 'dc-diff':
        if pairs is None:
            pairs = haze_pairs(count or 100, size or 64, seed)
        return dc_difference_stats(pairs)
    elif mode == 'radial':
        labels = None
        if images is None:
            corpus = synthetic_corpus(count or 20, size or 128, seed)
            images = [s.clean for s in corpus] + [s.degraded for s in corpus]
            labels = ['clear'] * len(corpus) + ['degraded'] * len(corpus)
        return radial_stats(images, config.rho_thresh, config.rho_norm, labels)

    corpus = synthetic_corpus(count or 20, size or 128, seed)
    if mode == 'transmission-mse':
        return transmission_stats(corpus, config.patch_radius,
                                  config.gradient, config.threads)
    return ablation_stats(corpus, config, config.threads)


def parse_airlight(text):
    """Parse ``'r,g,b'`` into three floats in ``(0, 1]``."""
    try:
        values = [float(part) for part in str(text).split(',')]
    except ValueError:
        values = []
    if len(values) != 3 or not all(0 < v <= 1 for v in values):
        msg = """Airlight must be three comma separated values in (0, 1],
            got {text!r}.""".format(text=text)
        raise ParamError(dedent(msg))
    return values


def synthesize_directory(clean_dir, outdir='.', beta_s=1.0,
                         airlight=(0.9, 0.9, 0.9), profile='linear-ramp',
                         seed=0):
    """Add synthetic haze to every image of `clean_dir`.

    Writes ``<stem>.haze.png`` and ``<stem>.tgt.png`` per image and a
    ``synth.json`` manifest. Image ``i`` in sorted order uses seed
    ``seed + i``.

    Returns:
        list: The manifest entries.
    """
    outdir = _ensure_dir(outdir)
    manifest = []
    for index, path in enumerate(image_paths(clean_dir)):
        scene = synthesize_haze(load_image(path), profile, beta_s, airlight,
                                seed + index)
        haze_path = outdir / (path.stem + '.haze.png')
        t_path = outdir / (path.stem + '.tgt.png')
        save_image(np.clip(scene.degraded, 0.0, 1.0), haze_path)
        save_image(plane_to_image(scene.t_gt), t_path)
        manifest.append({
            'input': str(path),
            'haze': str(haze_path),
            'transmission': str(t_path),
            'profile': profile,
            'beta_s': float(beta_s),
            'airlight': [float(a) for a in airlight],
            'seed': seed + index,
        })
        logger.info('Synthesized %s', haze_path)
    _write_text(outdir / 'synth.json',
                json.dumps({'scenes': manifest}, indent=2) + '\n')
    return manifest
