"""Split-search backend selection.

The compiled kernel is used when the extension built; set
HORSERULE_BACKEND=python|compiled to force one. Both produce bit-identical
trees, so the choice only affects speed.
"""

import os

from . import _split_py
from .errors import HorseRuleError

_IMPLS = {"python": _split_py.node_best_split}
try:
    from . import _splitc

    _IMPLS["compiled"] = _splitc.node_best_split
except ImportError:
    pass

_env = os.environ.get("HORSERULE_BACKEND")
if _env:
    if _env not in ("python", "compiled"):
        raise HorseRuleError(f"HORSERULE_BACKEND={_env!r}: expected 'python' or 'compiled'")
    if _env not in _IMPLS:
        raise HorseRuleError("HORSERULE_BACKEND=compiled but the extension is not built")
    _active = _env
else:
    _active = "compiled" if "compiled" in _IMPLS else "python"


def available_backends():
    return sorted(_IMPLS)


def active_backend():
    return _active


def set_backend(name):
    global _active
    if name not in _IMPLS:
        raise HorseRuleError(f"backend {name!r} not available (have {available_backends()})")
    _active = name


def node_best_split(orderT, XT, y, w, memb, cols, n_min):
    return _IMPLS[_active](orderT, XT, y, w, memb, cols, n_min)
