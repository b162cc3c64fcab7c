#####################################################################
#                                                                   #
# /plotting.py                                                      #
#                                                                   #
# Copyright 2026, the sfp contributors                              #
#                                                                   #
# This file is part of the program sfp, and is licensed under the   #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Figures for the statistics harness.

Figures are drawn on an Agg canvas directly, without pyplot, so plotting works
headless and from worker threads.
"""
import os
import logging

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .errors import ParamError

logger = logging.getLogger(__name__)

CHANNEL_COLOURS = {'R': 'tab:red', 'G': 'tab:green', 'B': 'tab:blue'}
DC_DIFF_MARK = 0.2


def _dc_diff(fig, frame):
    ax = fig.add_subplot(1, 1, 1)
    for channel, colour in CHANNEL_COLOURS.items():
        values = frame.loc[frame['channel'] == channel, 'abs_diff']
        ax.hist(values, bins=20, alpha=0.4, color=colour, label=channel)
    ax.axvline(DC_DIFF_MARK, color='k', linestyle='--')
    ax.set_xlabel('|DC clean - mean DC degraded|')
    ax.set_ylabel('count')
    cumulative = ax.twinx()
    ordered = np.sort(frame['abs_diff'].to_numpy())
    if ordered.size:
        cumulative.plot(ordered, np.arange(1, ordered.size + 1) / ordered.size,
                        color='k')
    cumulative.set_ylim(0, 1)
    cumulative.set_ylabel('cumulative fraction')
    ax.legend()


def _radial(fig, frame):
    for index, (channel, colour) in enumerate(CHANNEL_COLOURS.items()):
        ax = fig.add_subplot(1, 3, index + 1)
        for label, group in frame[frame['channel'] == channel].groupby(
                'label', sort=True):
            ax.hist(group['phi'], bins=20, alpha=0.5, label=label or 'all')
            ax.axvline(group['phi'].mean(), linestyle='--', color=colour)
        ax.set_title(channel)
        ax.set_xlabel('low-frequency share')
        ax.legend()


def _transmission(fig, frame):
    ax = fig.add_subplot(1, 1, 1)
    ax.scatter(frame['mse_dcp'], frame['mse_sdp'], color='tab:blue')
    top = max(float(frame[['mse_dcp', 'mse_sdp']].to_numpy().max()), 1e-6) \
        if len(frame) else 1.0
    ax.plot([0, top], [0, top], color='k', linestyle='--')
    ax.set_xlabel('dark channel MSE')
    ax.set_ylabel('spectral direction MSE')


def _ablation(fig, frame):
    ax = fig.add_subplot(1, 1, 1)
    means = frame.groupby('arm', sort=False)['psnr'].mean()
    ax.bar(range(len(means)), means.to_numpy(), tick_label=list(means.index))
    ax.set_ylabel('mean PSNR (dB)')


PLOTTERS = {
    'dc-diff': _dc_diff,
    'radial': _radial,
    'transmission-mse': _transmission,
    'ablation': _ablation,
}


def plot_stats(frame, mode, path):
    """Render the figure for a statistics table and save it to `path`.

    Args:
        frame (:obj:`pandas:pandas.DataFrame`): Output of
            :func:`sfp.pipeline.run_stats` for `mode`.
        mode (str): Statistics mode.
        path (str): Output image file; the format follows the extension.
    """
    if mode not in PLOTTERS:
        raise ParamError("No plot is defined for statistics mode %r." % mode)
    fig = Figure(figsize=(12, 4) if mode == 'radial' else (6, 4))
    FigureCanvasAgg(fig)
    PLOTTERS[mode](fig, frame)
    fig.tight_layout()
    fig.savefig(os.fspath(path))
    logger.info('Saved %s plot to %s', mode, path)
