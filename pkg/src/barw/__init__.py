"""Nodal length of boundary-adapted arithmetic random waves on the unit square.

Modules: ``arith`` (integers, Gaussian primes, density counters),
``spectrum`` (lattice points on circles), ``correlations`` (exact tuple
counts), ``field`` (sampling and second moments), ``kacrice`` (zero density
and its integrals), ``nodal`` (measured nodal length), ``constructor``
(levels with a prescribed angular coefficient) and ``cli``.
"""

__version__ = "0.1.0"

from .errors import BudgetExceeded, CrossCheckError, DegeneratePointError
from .kacrice import Box
from .spectrum import CircleSpectrum, enumerate_spectrum

__all__ = [
    "__version__",
    "Box",
    "BudgetExceeded",
    "CircleSpectrum",
    "CrossCheckError",
    "DegeneratePointError",
    "enumerate_spectrum",
]
