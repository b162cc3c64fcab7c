#####################################################################
#                                                                   #
# /errors.py                                                        #
#                                                                   #
# Copyright 2026, the sfp contributors                              #
#                                                                   #
# This file is part of the program sfp, and is licensed under the   #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Exception types raised by sfp.

Every error derives from :class:`SFPError` and from the builtin exception that
best describes it, so callers can catch either ``SFPError`` or e.g.
``ValueError``.
"""


class SFPError(Exception):
    """Base class for all errors raised by sfp."""


class ImageIOError(SFPError, OSError):
    """A file could not be read or written."""


class FormatError(SFPError, ValueError):
    """A file was read but could not be decoded as a supported raster."""


class DimensionError(SFPError, ValueError):
    """Array shapes are invalid or do not match."""


class DegenerateInput(SFPError, ValueError):
    """The input carries no usable signal (flat image, black channel...)."""


class ParamError(SFPError, ValueError):
    """A numeric parameter is outside its documented range."""


class ConfigError(ParamError):
    """A pipeline configuration is malformed."""


class NumericalError(SFPError, ArithmeticError):
    """A computation produced a result that violates a numerical contract."""
