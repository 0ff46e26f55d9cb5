"""Kernel backend selection: compiled extension if importable, else NumPy.

Set ``PIXCLUST_FORCE_PYTHON=1`` to skip the extension (used by the backend
benchmark and equivalence tests).  Both backends are bit-compatible.
"""

from __future__ import annotations

import os

if os.environ.get("PIXCLUST_FORCE_PYTHON"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _ckernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

COMPILED: bool = bool(kernels.COMPILED)

label_components = kernels.label_components
dp_segment = kernels.dp_segment
dp_segment_prefix = kernels.dp_segment_prefix
