"""Stationary lattice fields, noise classes and fractional Ornstein-Uhlenbeck simulation."""

from ._latfield import *  # noqa: F401,F403
from ._latfield import LatticeError, __version__  # noqa: F401
