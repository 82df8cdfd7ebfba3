"""Positive periodic solutions of delay evolution equations u' + Au = F(t, u(t), u(t - tau)).

Thin wrapper over the C++ core. The main entry points are build_generator,
spectrum, picard_solve, solve_ivp, check_spectral_gap, bellman_bound,
fourier_periodic_oracle, stability_report, laplacian_1d and load_problem.
"""

from ._perideval import *  # noqa: F401,F403
from ._perideval import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
