"""Backend selection for the hot kernels.

The compiled extension ``hypqec._core`` is used when it imports; otherwise,
or when ``HYPQEC_PURE=1`` is set, the pure-Python module is used.  Both expose
the same functions with identical results.
"""

from __future__ import annotations

import os

from . import _fallback as fallback

if os.environ.get("HYPQEC_PURE") == "1":
    compiled = None
else:
    try:
        from . import _core as compiled
    except ImportError:  # extension not built
        compiled = None

BACKEND = "compiled" if compiled is not None else "python"
_impl = compiled if compiled is not None else fallback

coset_enumerate = _impl.coset_enumerate
standardize_table = _impl.standardize_table
gf2_echelon = _impl.gf2_echelon
bp_kernel = _impl.bp_kernel
