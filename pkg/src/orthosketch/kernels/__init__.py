"""Hot-kernel dispatch: compiled extension when built, numpy fallback otherwise.

Set ORTHOSKETCH_BACKEND=python to force the fallback (used by the benchmark
and the backend-equivalence tests).
"""

import os

from . import _fallback

_forced = os.environ.get("ORTHOSKETCH_BACKEND", "").lower()

if _forced in ("", "native"):
    try:
        from . import _native as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _forced == "native":
            raise
        _impl = _fallback
else:
    _impl = _fallback

BACKEND = _impl.BACKEND

nonmax_suppress = _impl.nonmax_suppress
hysteresis = _impl.hysteresis
nearest_index = _impl.nearest_index
corridor_select = _impl.corridor_select
cone_candidates = _fallback.cone_candidates  # not hot; single implementation
