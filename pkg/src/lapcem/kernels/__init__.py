"""Hot kernels behind a backend switch.

``numba_kernels`` and ``numpy_kernels`` are always importable for comparison;
the module-level names point at whichever one :mod:`lapcem._backend` selected.
"""

from .. import _backend
from . import _np as numpy_kernels

if _backend.HAS_NUMBA:
    from . import _nb as numba_kernels
else:  # pragma: no cover
    numba_kernels = None

active = numba_kernels if _backend.USE_NUMBA else numpy_kernels

adjacency = active.adjacency
degree_profile = active.degree_profile
count_components = active.count_components
spectral_radius = active.spectral_radius
bound_value = active.bound_value
score_conjecture_batch = active.score_conjecture_batch
rollout_batch = active.rollout_batch

MAX_SWEEPS = 60

__all__ = [
    "active",
    "numba_kernels",
    "numpy_kernels",
    "adjacency",
    "degree_profile",
    "count_components",
    "spectral_radius",
    "bound_value",
    "score_conjecture_batch",
    "rollout_batch",
    "MAX_SWEEPS",
]
