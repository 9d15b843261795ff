"""Concrete ultradistributions and their sequential convolution."""

from .convolution import *  # noqa: F401,F403
from .convolution import __all__ as _conv
from .distribution import *  # noqa: F401,F403
from .distribution import __all__ as _dist

__all__ = [*_dist, *_conv]
