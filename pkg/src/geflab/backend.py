"""Backend selection for the hot numeric kernel.

The compiled extension is preferred; a numpy fallback keeps the package fully
functional without a compiler.  Override with the environment variable
``GEFLAB_BACKEND`` set to ``auto`` (default), ``cython`` or ``python``.
"""

import os


def _load():
    choice = os.environ.get("GEFLAB_BACKEND", "auto").lower()
    if choice not in ("auto", "cython", "python"):
        raise ValueError(f"GEFLAB_BACKEND must be auto|cython|python, got {choice!r}")
    if choice in ("auto", "cython"):
        try:
            from . import _corekernels
            return _corekernels, "cython"
        except ImportError:
            if choice == "cython":
                raise
    from . import _corekernels_py
    return _corekernels_py, "python"


_impl, BACKEND_NAME = _load()

poly_jets = _impl.poly_jets


def available_backends():
    """Names of importable backends, compiled one first."""
    names = []
    try:
        from . import _corekernels  # noqa: F401
        names.append("cython")
    except ImportError:
        pass
    names.append("python")
    return names
