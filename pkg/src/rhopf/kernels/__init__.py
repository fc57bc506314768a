"""Backend selection for the term-map kernels.

The compiled extension is used when it imported cleanly; setting
``RHOPF_PURE_PYTHON=1`` in the environment forces the fallback (used by the
benchmark and by CI on platforms without a compiler).
"""

import os

if os.environ.get("RHOPF_PURE_PYTHON"):
    from . import _poly_py as _impl
else:
    try:
        from . import _poly_c as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _poly_py as _impl  # type: ignore[no-redef]

BACKEND = _impl.BACKEND
mono_mul = _impl.mono_mul
mono_pow = _impl.mono_pow
poly_mul = _impl.poly_mul
poly_add = _impl.poly_add
poly_sub = _impl.poly_sub
poly_neg = _impl.poly_neg
poly_scale = _impl.poly_scale
