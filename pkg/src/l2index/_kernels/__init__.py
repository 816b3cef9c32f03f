"""Hot kernels with a compiled core and a numpy fallback.

The compiled extension is used when importable unless the environment
variable ``L2INDEX_PURE_PYTHON`` is set to a non-empty value.
"""
import os

from . import _gram_py
from ._gram_py import monomial_matrix

BACKEND = "python"
gram = _gram_py.gram

if not os.environ.get("L2INDEX_PURE_PYTHON"):
    try:
        from ._gram_cy import gram  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

__all__ = ["BACKEND", "gram", "monomial_matrix", "python_gram"]

python_gram = _gram_py.gram
