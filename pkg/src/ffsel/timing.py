"""CPU-time clocks shared by selection and benchmarking code."""

from __future__ import annotations

import time

__all__ = ["thread_cpu_time", "process_cpu_time"]


def process_cpu_time() -> float:
    """Process-wide CPU time (user+system), summed over all threads."""
    return time.process_time()


def thread_cpu_time() -> float:
    """CPU time consumed by the calling thread only.

    Used to attribute cost to a single-threaded unit of work even when
    other workers run concurrently in the same process.
    """
    try:
        return time.clock_gettime(time.CLOCK_THREAD_CPUTIME_ID)
    except (AttributeError, OSError):  # non-POSIX fallback
        return time.process_time()
