"""Linearization of commuting deck transformations near a complex torus.

Thin wrapper over the C++ core; see the package README for the library and
CLI documentation.
"""

from ._torus_kam import *  # noqa: F401,F403
from ._torus_kam import __version__  # noqa: F401
