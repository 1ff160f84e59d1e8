"""Select the compiled integrator when built, else the numpy fallback.

Set ``REGIOSIM_BACKEND=python`` to force the fallback.
"""

import os

from . import _fallback

fallback = _fallback

if os.environ.get("REGIOSIM_BACKEND", "").lower() == "python":
    kernels = _fallback
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        kernels = _fallback

BACKEND = kernels.BACKEND
integrate = kernels.integrate
