"""Select the compiled kernel when available, else the numpy fallback.

Set ``BRG_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
pair_terms = _fallback.pair_terms
rollout_returns = _fallback.rollout_returns

if os.environ.get("BRG_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        pair_terms = _kernels.pair_terms
        rollout_returns = _kernels.rollout_returns
        BACKEND = "cython"
