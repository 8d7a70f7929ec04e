"""Kernel backend selection.

The compiled extension is preferred; set MLVSIM_PURE_PYTHON=1 to force the
pure-Python twin (used by the parity tests and the benchmark). Both backends
are bit-identical by construction, so the choice never affects results.
"""

import os

if os.environ.get("MLVSIM_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND

geometric_attr = _impl.geometric_attr
percent_step_attr = _impl.percent_step_attr
reward_value = _impl.reward_value
q_step = _impl.q_step
exp_interval = _impl.exp_interval
