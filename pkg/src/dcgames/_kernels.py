"""Select the compiled kernels when importable, else the pure-Python ones.

Set ``DCGAMES_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and by the backend-agreement tests).
"""

import os

from . import _simplex_py

BACKEND = "python"
run_simplex = _simplex_py.run_simplex

if os.environ.get("DCGAMES_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._simplex import run_simplex  # noqa: F811
    except ImportError:
        pass
    else:
        BACKEND = "cython"

python_run_simplex = _simplex_py.run_simplex
