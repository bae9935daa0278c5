"""Stepping kernels: compiled extension with pure-NumPy fallback.

The compiled module is preferred when importable; set FORMSTAB_KERNELS to
"python" or "compiled" to force a backend (the latter raises if the
extension is missing).
"""

import os

from . import _ref

_choice = os.environ.get("FORMSTAB_KERNELS", "auto")

if _choice == "python":
    _impl = _ref
elif _choice == "compiled":
    from . import _core as _impl
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _ref

BACKEND = _impl.BACKEND
advance_linear = _impl.advance_linear
wave_step = _impl.wave_step

__all__ = ["BACKEND", "advance_linear", "wave_step"]
