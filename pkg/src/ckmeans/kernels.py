"""Backend selection for the hot loops.

``compiled`` is the Cython extension module when it was built and is not
disabled through ``CKMEANS_PURE_PYTHON=1``; otherwise it is None and the
numpy implementations in :mod:`ckmeans.admm` and :mod:`ckmeans.oracle`
are used.
"""

import os

compiled = None
if os.environ.get("CKMEANS_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

BACKEND = "cython" if compiled is not None else "python"
