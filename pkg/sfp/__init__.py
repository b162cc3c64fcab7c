#####################################################################
#                                                                   #
# /__init__.py                                                      #
#                                                                   #
# Copyright 2026, the sfp contributors                              #
#                                                                   #
# This file is part of the program sfp, and is licensed under the   #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Training-free scene recovery from spatial and frequency priors.

The most used entry points are re-exported here::

    import sfp
    img = sfp.load_image('hazy.png')
    output, report, intermediates = sfp.recover(img)
    sfp.save_image(output, 'hazy.sfp.png')
"""
from .__version__ import __version__

from .errors import (ConfigError, DegenerateInput, DimensionError, FormatError,
                     ImageIOError, NumericalError, ParamError, SFPError)
from .image_core import (lab_to_rgb, load_image, luminance, rgb_to_lab,
                         save_image)
from .spatial import (Atmosphere, DirectionField, TransmissionMap,
                      estimate_atmospheric_light, estimate_transmission,
                      guided_filter, invert_asm, spectral_direction)
from .frequency import (FdpParams, FreqMask, RadialGrid, Spectrum,
                        alpha_from_dc, build_mask, enhance, fft2, ifft2,
                        low_freq_percentage, optimize_beta, radial_grid)
from .fusion import (FusionWeights, WaveletBands, dwt_haar, fuse, fuse_ab,
                     fuse_l, fusion_weights, idwt_haar, postprocess)
from .oracle import (SyntheticScene, dark_channel_baseline,
                     dc_difference_stats, radial_stats, synthesize_haze,
                     transmission_mse)
from .metrics import psnr, uciqe
from .pipeline import (PipelineConfig, RecoveryReport, recover, run_batch,
                       run_single, run_stats)
