"""
Deterministic trial execution.

Usage:
    runner = TrialRunner(workers=4)
    values = runner.map(lambda t: statistic(t), n=1000)
"""

import contextvars
import logging
import queue
import threading
from typing import Any, Callable, Dict, List

from .core import _log_event
from .errors import TrialError

logger = logging.getLogger("tensormeans.runner")


class TrialRunner:
    """Run ``fn(trial_index)`` over a range of trials, returning results in index order.

    Each trial must depend only on its index, so results are identical for
    every worker count. Worker threads run inside a copy of the caller's
    context, so active tolerance sessions carry over.
    """

    def __init__(self, workers: int = 1):
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        self.workers = workers

    def map(self, fn: Callable[[int], Any], n: int, start: int = 0) -> List[Any]:
        if n < 0:
            raise ValueError(f"trial count must be nonnegative, got {n}")
        if self.workers == 1 or n <= 1:
            return [self._run_one(fn, t) for t in range(start, start + n)]
        return self._map_threaded(fn, n, start)

    @staticmethod
    def _run_one(fn: Callable[[int], Any], trial_index: int) -> Any:
        try:
            return fn(trial_index)
        except Exception as exc:
            _log_event("trial_failed", logging.WARNING, log=logger, trial_index=trial_index, error=repr(exc))
            raise TrialError(f"trial {trial_index} failed: {exc}", trial_index=trial_index) from exc

    def _map_threaded(self, fn: Callable[[int], Any], n: int, start: int) -> List[Any]:
        tasks: queue.Queue = queue.Queue()
        for t in range(start, start + n):
            tasks.put(t)

        results: Dict[int, Any] = {}
        failures: Dict[int, BaseException] = {}
        lock = threading.Lock()
        parent_ctx = contextvars.copy_context()

        def worker_loop():
            ctx = parent_ctx.copy()
            while True:
                try:
                    t = tasks.get_nowait()
                except queue.Empty:
                    return

                # Trials past a known failure are skipped; lower ones still run
                with lock:
                    if failures and t > min(failures):
                        continue

                try:
                    value = ctx.run(fn, t)
                except Exception as exc:
                    with lock:
                        failures[t] = exc
                else:
                    with lock:
                        results[t] = value

        threads = [
            threading.Thread(target=worker_loop, daemon=True)
            for _ in range(min(self.workers, n))
        ]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        if failures:
            t = min(failures)
            exc = failures[t]
            _log_event("trial_failed", logging.WARNING, log=logger, trial_index=t, error=repr(exc))
            raise TrialError(f"trial {t} failed: {exc}", trial_index=t) from exc

        return [results[t] for t in range(start, start + n)]
