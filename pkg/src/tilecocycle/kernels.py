"""Hot loops, compiled when the extension is built and numpy otherwise.

Set ``TILECOCYCLE_PURE=1`` to force the numpy versions.
"""

import os

from . import _fallback

BACKEND = "python"
if os.environ.get("TILECOCYCLE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback
else:
    _impl = _fallback

fourier_level = _impl.fourier_level
chain_product = _impl.chain_product
chain_log_norms = _impl.chain_log_norms
box_transform_sum = _impl.box_transform_sum

__all__ = ["BACKEND", "fourier_level", "chain_product", "chain_log_norms", "box_transform_sum"]
