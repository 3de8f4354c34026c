"""Hot-loop dispatch: the compiled core when built, else the numpy fallback.

Set ``RATIOGROUP_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import os

if os.environ.get("RATIOGROUP_PURE"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        from . import _kernels_py as _impl

BACKEND: str = _impl.BACKEND
strip_primes = _impl.strip_primes
pair_histogram = _impl.pair_histogram

__all__ = ["BACKEND", "strip_primes", "pair_histogram"]
