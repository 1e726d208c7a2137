"""Exact combinatorics for weak semistable reduction of fan morphisms.

Modules:
    lattice     integer linear algebra: normal forms, sublattices, maps
    cone        rational polyhedral cones with exact double description
    monoid      affine monoids, Hilbert bases, pushouts, integrality tests
    fan         fans, fan morphisms, fiber products, modifications
    reduction   the reduction pipeline and its universal property
    conecomplex cone complexes, gluings and the reduction on complexes
    cli         JSON document interface and SVG rendering
"""

__version__ = "0.1.0"
