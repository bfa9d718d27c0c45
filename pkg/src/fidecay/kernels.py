"""Kernel backend selection.

The compiled extension `fidecay._fast` is preferred when it has been
built; otherwise the numpy fallback `fidecay._slow` is used.  Both expose
the same three functions and are cross-checked in the test suite.  Set
FIDECAY_FORCE_PYTHON=1 to ignore the compiled module (used by the
benchmark script).
"""

import os

from . import _slow

_impl = _slow
if not os.environ.get("FIDECAY_FORCE_PYTHON"):
    try:
        from . import _fast as _impl  # type: ignore[no-redef]
    except ImportError:
        pass

BACKEND = "python" if _impl is _slow else "cython"

make_spin_plan = _impl.make_spin_plan
spin_apply = _impl.spin_apply
displacement_matrix = _impl.displacement_matrix
