"""Z2 lattice gauge-Higgs model toolkit backed by a C++ core."""

from ._core import *  # noqa: F401,F403
from ._core import build_id  # noqa: F401
