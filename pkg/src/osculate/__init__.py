"""Variation of constants for perturbed Kepler motion.

Modules: ``dynsys`` (flows), ``kepler`` (two-body model and elements),
``motions`` (charts on the manifold of motions), ``brackets`` (Lagrange
parentheses and Poisson brackets), ``varconst`` (element-rate equations),
``verify`` (numerical checks) and ``cli``.
"""

__version__ = "0.1.0"
