"""Run a callable on a thread with a large stack.

Deeply nested terms (a decoded nat near 10^5 is one long constructor
chain) need more recursion headroom than the interpreter's default
stack allows.  A worker thread with a 512 MiB stack handles depths in
the hundreds of thousands; the recursion limit is raised only while
the worker runs.
"""

from __future__ import annotations

import sys
import threading
from typing import Any, Callable

STACK_BYTES = 512 * 1024 * 1024
RECURSION_LIMIT = 400_000


def call_with_deep_stack(fn: Callable[..., Any], *args: Any, **kwargs: Any) -> Any:
    """Call fn(*args, **kwargs) on a big-stack thread; re-raise its error."""
    result: list[Any] = []
    error: list[BaseException] = []

    def run() -> None:
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(RECURSION_LIMIT)
        try:
            result.append(fn(*args, **kwargs))
        except BaseException as exc:  # transported to the caller
            error.append(exc)
        finally:
            sys.setrecursionlimit(old)

    old_size = threading.stack_size(STACK_BYTES)
    try:
        worker = threading.Thread(target=run, name="godelgen-deep-stack")
        worker.start()
    finally:
        threading.stack_size(old_size)
    worker.join()
    if error:
        raise error[0]
    return result[0]
