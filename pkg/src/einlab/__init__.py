"""Numerical lab for static Einstein metrics with negative Ricci curvature.

Modules:
    geom_core     curvature of warped cohomogeneity-one metrics, FD oracle
    bh_family     AdS black holes, horizon roots, periods and the fold
    fg_expansion  geodesic compactification and boundary-series extraction
    cusp_glue     extremal cusp asymptotics and the tube/extremal gluing
    cli           scenario runner and deterministic sweeps
"""

from . import bh_family, cusp_glue, fg_expansion, geom_core
from .errors import EinlabError

__all__ = ["bh_family", "cusp_glue", "fg_expansion", "geom_core", "EinlabError"]
__version__ = "0.1.0"
