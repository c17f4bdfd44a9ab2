"""Selects the compiled stepper when available, the numpy one otherwise.

Set RAMANPHOTON_BACKEND=py or =c to force a choice ("c" raises if the
extension is missing).  Both expose the same ``run_batch`` contract and agree
to round-off; see tests/test_kernel_parity.py.
"""

from __future__ import annotations

import os

from . import _pykernel

_choice = os.environ.get("RAMANPHOTON_BACKEND", "").strip().lower()

if _choice in ("py", "python", "numpy"):
    _impl = _pykernel
elif _choice in ("c", "cython", "compiled"):
    from . import _kernel as _impl
else:
    try:
        from . import _kernel as _impl
    except ImportError:
        _impl = _pykernel

run_batch = _impl.run_batch
backend_name = _impl.backend_name
