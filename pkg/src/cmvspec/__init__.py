"""Electric quantum-walk and skew-shift CMV operators on the unit circle.

Builds the five-diagonal walk and CMV matrices, their diagonal gauge
conjugations, and the finite-volume spectral checks (eigenangle gaps and
Weyl-criterion certification) showing the spectrum filling the whole
circle for irrational fields.
"""

__version__ = "0.1.0"

from .kernels import backend

__all__ = ["__version__", "backend"]
