"""Convex-duality solver for weakly coercive nonlinear diffusion equations.

The heavy lifting lives in the compiled extension ``bevar._core``; this
package re-exports its public surface.
"""

from bevar import _core
from bevar._core import __version__  # noqa: F401

__all__ = ["__version__"]
for _name in dir(_core):
    if not _name.startswith("_"):
        globals()[_name] = getattr(_core, _name)
        __all__.append(_name)
del _core, _name
