"""Numerical laboratory for symplectic capacities of convex bodies.

Submodules: symcore (linear symplectic algebra), bodies (support functions
and membership), ehz (dual-action capacity minimization), orbits (closed
characteristics on the ball-cylinder intersection), bounds (Gromov-width
lower bounds), cli (command-line interface).
"""

from . import bodies, bounds, ehz, orbits, symcore, verify

__version__ = "0.1.0"

__all__ = ["bodies", "bounds", "ehz", "orbits", "symcore", "verify", "__version__"]
