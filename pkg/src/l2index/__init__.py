"""Numerical L^2-extension index of weights on holomorphic cylinders.

The index of a weight ``phi`` on a cylinder ``P`` centered at ``a`` is the
least weighted energy of a holomorphic ``f`` with ``f(a) = 1``, divided by
``|P| e^{-phi(a)}``.  Plurisubharmonic weights have index ``<= 1`` on every
admissible cylinder, pluriharmonic ones exactly 1; this package computes the
index with polynomial Gram systems and classifies weights accordingly.
"""
__version__ = "0.1.0"

from ._kernels import BACKEND
from .bergman import assemble_gram, kernel_diag, min_extension
from .classify import exhibit_non_uniqueness, twist_test, uniqueness_check, verdict
from .geometry import Cylinder, Domain, contains, sample_cylinder, volume
from .index import IndexResult, Tolerances, index_sweep, l2_index
from .weights import Weight, catalog, catalog_weight, from_expression, resolve

__all__ = [
    "BACKEND",
    "Cylinder",
    "Domain",
    "IndexResult",
    "Tolerances",
    "Weight",
    "assemble_gram",
    "catalog",
    "catalog_weight",
    "contains",
    "exhibit_non_uniqueness",
    "from_expression",
    "index_sweep",
    "kernel_diag",
    "l2_index",
    "min_extension",
    "resolve",
    "sample_cylinder",
    "twist_test",
    "uniqueness_check",
    "verdict",
    "volume",
]
