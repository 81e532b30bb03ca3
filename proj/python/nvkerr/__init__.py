"""Helicity-resolved pump-probe Kerr rotation: models, fits and calculators."""

from ._nvkerr import *  # noqa: F401,F403
from ._nvkerr import __doc__  # noqa: F401

__version__ = "0.1.0"
