"""Numerical toolkit for half-harmonic maps in one dimension.

Fractional Laplacians and Riesz transforms on the line and the circle,
Poisson kernels, compensated commutators, Pohozaev-type identity checks,
stereographic transfer, a constrained gradient flow with bubbling and neck
diagnostics, and an explicit scaling counterexample, with a CLI front end.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    acceptance,
    commutators,
    counterexample,
    fracops,
    geometry,
    halfharmonic,
    norms,
    pohozaev,
    stereo,
)
