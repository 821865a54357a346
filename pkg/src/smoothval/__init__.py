"""Smooth valuations on planar and spherical bodies.

Normal-cycle evaluation, the Rumin operator, the Gelfand-transform product
of smooth valuations, intersection currents for transversal polygons, and
Monte Carlo kinematic formulas on S^2 and the windowed planar motion group.
"""

__version__ = "0.1.0"

from .errors import SmoothvalError

__all__ = ["SmoothvalError", "__version__"]
