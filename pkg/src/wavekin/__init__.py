"""Fundamental solution of a linearized wave-kinetic equation.

The package evaluates the dispersion symbol W, the periodic normalizer B built
from it, the Mellin symbol U(t, s) of the fundamental solution, and the
fundamental solution Lambda(t, x) itself, then cross-validates everything
against a direct log-grid discretization of the collision operator.

Layout:

- ``contour``   generic vertical-line / circle quadrature engine
- ``complexfn`` gamma-family special functions and the symbol W
- ``kernels``   collision kernels K, H, M and their consistency checks
- ``bfunc``     the normalizer B(s) and the residue/constant ledger
- ``ufunc``     U(t, s) (Mellin symbol) and V(z, s) (Laplace transform)
- ``fundsol``   Lambda(t, x): regimes, profiles, Q1/Q2 asymptotics, pairings
- ``kinetic``   direct collision-operator discretization on a log grid
- ``cauchy``    Cauchy-problem solver by superposition of fundamental solutions
- ``cli``       command-line entry points, including the ``verify`` suites
"""

from wavekin.errors import (
    BracketError,
    NoSignChangeError,
    PoleError,
    RegimeError,
    TailModelError,
    TruncationError,
    WavekinError,
)

__version__ = "0.1.0"

__all__ = [
    "WavekinError",
    "BracketError",
    "NoSignChangeError",
    "PoleError",
    "RegimeError",
    "TailModelError",
    "TruncationError",
    "__version__",
]
