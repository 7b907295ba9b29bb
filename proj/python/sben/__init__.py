"""Python interface to the dissipative-Hamiltonian variational solver toolkit.

The compiled extension ``_sben`` lives inside this package when installed as a
wheel; during in-tree CMake test runs it is on ``PYTHONPATH`` as a top-level
module instead, hence the import fallback.
"""

try:
    from ._sben import *  # noqa: F401,F403
    from . import _sben as _core
except ImportError:  # in-tree build: extension is a sibling on sys.path
    from _sben import *  # noqa: F401,F403
    import _sben as _core

__version__ = "1.0.0"
__all__ = [name for name in dir(_core) if not name.startswith("_")]
