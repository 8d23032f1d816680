"""Numerical laboratory for the WZW / harmonic-map potential theory on the
Riemann sphere: Fubini-Study quantization, matrix Dirichlet solvers,
graph-harmonicity testers, quantized Perron envelopes and the diastasis
Legendre transform."""

__version__ = "0.1.0"

from .domains import BoxDomain, CylinderDomain
from .envelope import (BoundaryData, catalog_potential, convergence_study,
                       quantized_envelope)
from .errors import WzwError
from .fields import HolomorphicDisc, PotentialField
from .geometry import ChartPoint, XGrid, diastasis, local_potential, quadrature_grid
from .matrix_harmonic import (MatrixField, geodesic, harmonic_residual,
                              solve_harmonic_dirichlet, solve_hym)
from .quantization import FSPotential, bergman_error, fubini_study, hilbert_map

__all__ = [
    "BoxDomain", "CylinderDomain", "BoundaryData", "catalog_potential",
    "convergence_study", "quantized_envelope", "WzwError", "HolomorphicDisc",
    "PotentialField", "ChartPoint", "XGrid", "diastasis", "local_potential",
    "quadrature_grid", "MatrixField", "geodesic", "harmonic_residual",
    "solve_harmonic_dirichlet", "solve_hym", "FSPotential", "bergman_error",
    "fubini_study", "hilbert_map",
]
