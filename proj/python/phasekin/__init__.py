"""Phase-space kinetic transport, Hamiltonian moment closures and
two-temperature radiation hydrodynamics."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
