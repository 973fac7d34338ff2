"""Kernel selection: compiled extension when available, numpy fallback otherwise.

Set TRADENET_PURE=1 to force the fallback (used by the benchmark and tests).
"""
import os

from . import fallback

if os.environ.get("TRADENET_PURE"):
    impl = fallback
else:
    try:
        from . import _loop as impl  # type: ignore[no-redef]
    except ImportError:
        impl = fallback

KERNEL_NAME: str = impl.KERNEL_NAME
iterate_once = impl.iterate_once
select_topk = impl.select_topk
splitmix64 = impl.splitmix64
