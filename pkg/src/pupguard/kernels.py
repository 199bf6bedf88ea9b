"""Backend selection for the per-pixel feature kernels.

The compiled extension is preferred when importable; the numpy fallback is
used otherwise, or when ``PUPGUARD_PURE_PYTHON=1`` is set in the environment.
``BACKEND`` names the active implementation.
"""

import os

from . import _kernels_py

if os.environ.get("PUPGUARD_PURE_PYTHON") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
lbp_code_image = _impl.lbp_code_image
hog_cell_histograms = _impl.hog_cell_histograms
