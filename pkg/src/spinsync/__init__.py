"""Numerical laboratory for Lindblad superoperators of small spin systems.

Builds Liouvillians for named spin models, classifies their decay-free
eigenmodes, solves steady states under seeded random perturbations, and
computes steady-state phase-space synchronization diagnostics across
ensemble sweeps.
"""

__version__ = "0.1.0"

from . import (  # noqa: E402,F401
    harness,
    liouvillian,
    models,
    operators,
    phasespace,
    randliouv,
    syncstats,
)
