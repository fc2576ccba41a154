"""Backend selection for the hot numeric kernels.

The compiled extension is used when it was built; otherwise the pure-Python
module is loaded.  Set ``EDGEPROV_PURE_PYTHON=1`` to force the fallback.
"""
import os

if os.environ.get("EDGEPROV_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND
queue_step = _impl.queue_step
virtual_queue_step = _impl.virtual_queue_step
lyapunov = _impl.lyapunov
dpp_objective = _impl.dpp_objective
score_candidates = _impl.score_candidates
replay_queue = _impl.replay_queue
replay_virtual = _impl.replay_virtual

__all__ = [
    "BACKEND", "queue_step", "virtual_queue_step", "lyapunov", "dpp_objective",
    "score_candidates", "replay_queue", "replay_virtual",
]
