"""Kernel backend selection.

The compiled Cython extension is preferred when present; the numpy fallback
is selected otherwise, or when VECDRIVE_NO_EXT is set in the environment.
Both expose identical signatures (see ``numpy_kernels``), so everything above
this module is backend-agnostic. ``vecdrive bench`` compares the two.
"""

import os

from . import numpy_kernels

compiled = None
if not os.environ.get("VECDRIVE_NO_EXT"):
    try:
        from . import _kernels as compiled  # type: ignore[no-redef]
    except ImportError:
        compiled = None

_active = compiled if compiled is not None else numpy_kernels

HAVE_COMPILED = compiled is not None

masked_softmax_fwd = _active.masked_softmax_fwd
masked_softmax_bwd = _active.masked_softmax_bwd
paint_polyline = _active.paint_polyline
paint_rect = _active.paint_rect


def active_name():
    return "compiled" if HAVE_COMPILED else "numpy"
