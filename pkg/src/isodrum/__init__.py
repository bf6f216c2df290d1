"""Isospectral planar domains with mixed Dirichlet-Neumann boundaries.

Construction of isospectral pairs by reflection, closed-form spectra for the
separable square/triangle pair, finite-element spectra for general labeled
domains, transplantation of eigenfunctions, heat-trace invariants, and
nodal-domain counting.
"""

__version__ = "0.1.0"
