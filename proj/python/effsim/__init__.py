"""Free-fermion simulation lab: mappings, noise models, bounds, sweeps."""

try:
    from ._effsim import *  # noqa: F401,F403
    from ._effsim import __doc__ as _doc
except ImportError:
    from _effsim import *  # noqa: F401,F403
    from _effsim import __doc__ as _doc

__doc__ = _doc
__version__ = "0.1.0"
