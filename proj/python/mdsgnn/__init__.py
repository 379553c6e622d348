"""Dual-stream GNN for node classification with missing features and edges."""

try:
    from ._mdsgnn import *  # noqa: F401,F403  (installed package layout)
    from ._mdsgnn import __version__  # noqa: F401
except ImportError:  # pragma: no cover - in-tree builds put the module on sys.path
    from _mdsgnn import *  # noqa: F401,F403
    from _mdsgnn import __version__  # noqa: F401
