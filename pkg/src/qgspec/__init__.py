"""Spectral toolkit for quantum graphs with the -R vertex coupling.

Submodules:
    coupling  - circulant vertex couplings, boundary residuals, S-matrices
    star      - bound states of star graphs
    bandscan  - band extraction from boolean momentum predicates
    hexband   - regular hexagonal lattice (-R and R couplings)
    genhex    - hexagonal lattice with three edge lengths (-R coupling)
    cli       - command line front end
"""

from .errors import (
    InvalidArgumentError,
    NumericFailureError,
    NumericSingularityError,
    UnsupportedVariantError,
)

__version__ = "0.1.0"

__all__ = [
    "InvalidArgumentError",
    "NumericFailureError",
    "NumericSingularityError",
    "UnsupportedVariantError",
]
