"""Numerical construction of steady gradient Ricci solitons of cohomogeneity one.

Multiply warped products over Einstein factors reduce to ODE systems in the
arclength ``t`` (metric coordinates) or in an autonomous phase parameter ``s``
(``X``/``Y`` coordinates).  The package seeds trajectories at the singular
orbit, integrates them with fixed-step RK4 and checks the resulting flows
against the monotone quantities and asymptotics they must satisfy.
"""
from .model import *  # noqa: F401,F403
from .systems import *  # noqa: F401,F403
from .seed import *  # noqa: F401,F403
from .integrate import *  # noqa: F401,F403
from .analyze import *  # noqa: F401,F403
from .linalg import eigvals_qr, hessenberg  # noqa: F401

__version__ = "0.1.0"
