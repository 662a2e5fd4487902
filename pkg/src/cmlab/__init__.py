"""Pseudospectral lab for the Calogero-Moser derivative NLS.

Subpackages: spectral core (grid, transforms, norms), soliton calculus and
identity verification, gauge transform, time evolution, modulation
decomposition and tracking, the formal modulation laws, chiral profiles,
and a CLI front end.
"""

from .spectral import Field, Grid, NormReport, inner_r, norms

__all__ = ["Field", "Grid", "NormReport", "inner_r", "norms"]
__version__ = "0.1.0"
