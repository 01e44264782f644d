"""Exact-arithmetic engine for orbifold disk potentials of framed toric branes.

Two independent pipelines compute the genus-zero one-hole potential of a
framed brane in a 3-dimensional Calabi-Yau toric stack: a closed-form
coefficient sum over extended effective classes, and the antiderivative of
log y along the associated plane curve.  All coefficients live in a
cyclotomic field, so agreement is checked monomial by monomial with exact
equality.
"""

from .exactring import CyclotomicField, CycloNumber, PochhammerPole, pochhammer

__all__ = [
    "CyclotomicField",
    "CycloNumber",
    "PochhammerPole",
    "pochhammer",
]

__version__ = "0.1.0"
