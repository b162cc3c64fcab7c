#####################################################################
#                                                                   #
# /__main__.py                                                      #
#                                                                   #
# Copyright 2026, the sfp contributors                              #
#                                                                   #
# This file is part of the program sfp, and is licensed under the   #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
import sys
import logging
import argparse
import dataclasses

from labscript_utils.setup_logging import setup_logging

from sfp.__version__ import __version__
from sfp.dataframe_utilities import write_csv
from sfp.errors import SFPError
from sfp.frequency import RHO_NORMS
from sfp.oracle import DEPTH_PROFILES
from sfp.image_core import load_image
from sfp.pipeline import (STATS_MODES, TRANSMISSION_ESTIMATORS, PipelineConfig,
                          image_paths, load_pairs, parse_airlight, run_batch,
                          run_single, run_stats, synthesize_directory)
from sfp.plotting import plot_stats
from sfp.spatial import GRADIENT_OPERATORS

logger = logging.getLogger('sfp')


def _flag(parser, name, help):
    parser.add_argument(name, action='store_const', const=True, default=None,
                        help=help)


def pipeline_options():
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group('pipeline options')
    group.add_argument('--config', help='JSON file of pipeline settings')
    _flag(group, '--no-sdp', 'skip spatial restoration')
    _flag(group, '--no-fdp', 'skip frequency enhancement')
    _flag(group, '--naive-fusion', 'average the sources instead of fusing')
    _flag(group, '--no-pp', 'skip gamma and highlight compression')
    _flag(group, '--night', 'reserved; runs the daytime pipeline')
    _flag(group, '--emit-intermediate',
          'also write transmission, spatial and frequency images')
    _flag(group, '--emit-h5', 'also write an hdf5 results file')
    _flag(group, '--timings', 'record per-stage wall-clock time')
    group.add_argument('--threads', type=int)
    group.add_argument('--patch-radius', type=int)
    group.add_argument('--gf-radius', type=int)
    group.add_argument('--gf-eps', type=float)
    group.add_argument('--gradient', choices=GRADIENT_OPERATORS)
    group.add_argument('--transmission', choices=TRANSMISSION_ESTIMATORS)
    group.add_argument('--rho-norm', choices=RHO_NORMS)
    group.add_argument('--rho-thresh', type=float)
    group.add_argument('--target-phi', type=float)
    group.add_argument('--beta-lo', type=float)
    group.add_argument('--beta-hi', type=float)
    group.add_argument('--beta-tol', type=float)
    return parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog='sfp',
        description='Training-free scene recovery from spatial and frequency '
                    'priors.',
    )
    parser.add_argument('--version', action='version',
                        version='sfp %s' % __version__)
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='log debug messages to the terminal')
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True
    parents = [pipeline_options()]

    recover = commands.add_parser('recover', parents=parents,
                                  help='recover a single image')
    recover.add_argument('input')
    recover.add_argument('-o', '--outdir', default='.')

    batch = commands.add_parser('batch', parents=parents,
                                help='recover every image in a directory')
    batch.add_argument('indir')
    batch.add_argument('-o', '--outdir', default='.')

    stats = commands.add_parser('stats', parents=parents,
                                help='compute prior statistics as CSV')
    stats.add_argument('mode', choices=STATS_MODES)
    stats.add_argument('--pairs', nargs=2, metavar=('DEGRADED', 'CLEAN'),
                       help='directories of degraded and clean images')
    stats.add_argument('--images', metavar='DIR',
                       help='directory of images for radial statistics')
    stats.add_argument('--count', type=int)
    stats.add_argument('--size', type=int)
    stats.add_argument('--seed', type=int, default=0)
    stats.add_argument('-o', '--output', help='CSV file; stdout if omitted')
    stats.add_argument('--plot', help='also save a figure to this file')

    synth = commands.add_parser('synth', help='add synthetic haze to images')
    synth.add_argument('clean_dir')
    synth.add_argument('--beta-s', type=float, default=1.0)
    synth.add_argument('--airlight', default='0.9,0.9,0.9')
    synth.add_argument('--profile', choices=DEPTH_PROFILES,
                       default='linear-ramp')
    synth.add_argument('--seed', type=int, default=0)
    synth.add_argument('-o', '--outdir', default='.')
    return parser


def config_from_args(args):
    """Defaults, then the config file, then command line options."""
    if args.config:
        config = PipelineConfig.from_file(args.config)
    else:
        config = PipelineConfig()
    overrides = {
        field.name: getattr(args, field.name)
        for field in dataclasses.fields(PipelineConfig)
        if getattr(args, field.name, None) is not None
    }
    return config.updated(**overrides)


def do_recover(args):
    run_single(args.input, config_from_args(args), args.outdir)
    return 0


def do_batch(args):
    summary = run_batch(args.indir, config_from_args(args), args.outdir)
    return 1 if (summary['errors'] != '').any() else 0


def do_stats(args):
    config = config_from_args(args)
    pairs = images = None
    if args.pairs:
        pairs = load_pairs(*args.pairs)
    if args.images:
        images = [load_image(path) for path in image_paths(args.images)]
    frame = run_stats(args.mode, config, pairs=pairs, images=images,
                      count=args.count, size=args.size, seed=args.seed)
    if args.output:
        write_csv(frame, args.output)
    else:
        write_csv(frame, sys.stdout)
    if args.plot:
        plot_stats(frame, args.mode, args.plot)
    return 0


def do_synth(args):
    synthesize_directory(args.clean_dir, args.outdir, args.beta_s,
                         parse_airlight(args.airlight), args.profile,
                         args.seed)
    return 0


COMMANDS = {
    'recover': do_recover,
    'batch': do_batch,
    'stats': do_stats,
    'synth': do_synth,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    # stdout may carry CSV; terminal output is warnings only unless -v
    setup_logging('sfp', terminal_level=logging.DEBUG if args.verbose
                  else logging.WARNING)
    logger.info('starting sfp %s %s', __version__, args.command)
    try:
        return COMMANDS[args.command](args)
    except SFPError as e:
        logger.error('%s: %s', type(e).__name__, e)
        return 1


if __name__ == '__main__':
    sys.exit(main())
