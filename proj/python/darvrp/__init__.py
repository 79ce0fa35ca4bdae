"""CVRP construction solver with distance-aware attention reshaping."""

try:
    from darvrp._core import *  # noqa: F401,F403
    from darvrp import _core as core  # noqa: F401
except ImportError:  # building against a bare CMake tree; module sits next to it
    from _core import *  # noqa: F401,F403
    import _core as core  # noqa: F401

__all__ = [name for name in dir(core) if not name.startswith("_")]
__version__ = "0.1.0"
