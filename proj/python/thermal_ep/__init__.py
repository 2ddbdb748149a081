"""Exceptional points of two coupled, driven, lossy resonators."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
