"""Python interface to the spectral-compensation simulator."""

from ._core import *  # noqa: F401,F403
