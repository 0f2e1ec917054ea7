"""Run deeply recursive evaluator code on a thread with a large stack."""

from __future__ import annotations

import sys
import threading
from typing import Callable, TypeVar

T = TypeVar("T")

_STACK_BYTES = 1024 * 1024 * 1024
_RECURSION_LIMIT = 200_000
_lock = threading.Lock()


def deep_call(fn: Callable[..., T], *args, **kwargs) -> T:
    """Call ``fn`` directly, retrying on a big-stack thread after ``RecursionError``.

    The retry is only safe for pure functions, which is all this is used for.
    """
    try:
        return fn(*args, **kwargs)
    except RecursionError:
        pass
    box: dict[str, object] = {}

    def target() -> None:
        try:
            box["value"] = fn(*args, **kwargs)
        except BaseException as exc:  # re-raised in the caller
            box["error"] = exc

    with _lock:
        old_limit = sys.getrecursionlimit()
        old_stack = threading.stack_size(_STACK_BYTES)
        sys.setrecursionlimit(_RECURSION_LIMIT)
        try:
            th = threading.Thread(target=target)
            th.start()
            th.join()
        finally:
            threading.stack_size(old_stack)
            sys.setrecursionlimit(old_limit)
    if "error" in box:
        raise box["error"]  # type: ignore[misc]
    return box["value"]  # type: ignore[return-value]
