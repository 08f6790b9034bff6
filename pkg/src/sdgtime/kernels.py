"""Pick the amplification kernel: compiled extension if importable, else numpy.

Set ``SDGTIME_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _amplify_py

EXDG = _amplify_py.EXDG
SPLIT_SDG = _amplify_py.SPLIT_SDG
EXPLICIT_MARCH = _amplify_py.EXPLICIT_MARCH
IMPLICIT_MARCH = _amplify_py.IMPLICIT_MARCH
CONSTANT = _amplify_py.CONSTANT

_ext = None
if os.environ.get("SDGTIME_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _amplify_ext as _ext
    except ImportError:
        _ext = None

BACKEND = "cython" if _ext is not None else "python"
amplification = _ext.amplification if _ext is not None else _amplify_py.amplification
python_amplification = _amplify_py.amplification
compiled_amplification = _ext.amplification if _ext is not None else None
