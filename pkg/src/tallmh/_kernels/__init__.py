"""Backend selection for the per-datum likelihood kernels.

The compiled extension is preferred when it importable; otherwise the numpy
reference implementation is used.  Set ``TALLMH_KERNELS=python`` to force the
fallback, or ``TALLMH_KERNELS=cython`` to fail loudly when the extension is
missing.
"""

import os

_forced = os.environ.get("TALLMH_KERNELS", "").strip().lower()

if _forced in ("python", "numpy", "py", "ref"):
    from . import _ref as impl
    backend = "numpy"
elif _forced in ("", "auto", "c", "cython", "fast"):
    try:
        from . import _fast as impl  # type: ignore[attr-defined]
        backend = "cython"
    except ImportError:
        if _forced not in ("", "auto"):
            raise ImportError(
                "TALLMH_KERNELS=%s requested but the compiled extension is "
                "not available" % _forced
            )
        from . import _ref as impl
        backend = "numpy"
else:
    raise ImportError("unrecognized TALLMH_KERNELS value: %r" % _forced)

__all__ = ["impl", "backend"]
