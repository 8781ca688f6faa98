"""Monte Carlo pricing of VIX-linked GMWB rider fees."""

from ._gmwb import *  # noqa: F401,F403
from ._gmwb import __version__  # noqa: F401
