"""Backend selection for the pair-term kernels.

Set CSCOHERENT_DISABLE_NUMBA=1 to force the pure-numpy implementations; the
numpy path is also the silent fallback when numba is unavailable. BACKEND
reports which one is active.
"""

import os

_FLAG = os.environ.get("CSCOHERENT_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG in {"1", "true", "yes", "on"}

if _DISABLED:
    from . import _pairs_numpy as _impl
    BACKEND = "numpy"
else:
    try:
        from . import _pairs_numba as _impl
        BACKEND = "numba"
    except ImportError:
        from . import _pairs_numpy as _impl
        BACKEND = "numpy"

sutherland_terms = _impl.sutherland_terms
threebody_terms = _impl.threebody_terms
trig_terms = _impl.trig_terms


def warmup() -> None:
    """Trigger JIT compilation (no-op on the numpy backend)."""
    import numpy as np

    xs2 = np.array([[0.0, 1.0]])
    xs3 = np.array([[0.0, 1.0, 3.0]])
    sutherland_terms(xs2)
    threebody_terms(xs3)
    trig_terms(xs2, 1.0)
