"""
Bounded worker pool for client training and replicate fan-out.

Results always come back in submission order, so a reduction over them is
the same whether the work ran sequentially or concurrently.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional, TypeVar


logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class WorkerPool:
    """
    Runs independent tasks on at most ``max_workers`` threads.

    With ``max_workers == 1`` tasks run inline on the calling thread.
    """

    def __init__(self, max_workers: int = 1):
        if max_workers < 1:
            raise ValueError(f"max_workers must be >= 1, got {max_workers}")
        self._max_workers = max_workers
        self._executor: Optional[ThreadPoolExecutor] = None

        # Statistics
        self._submitted = 0
        self._completed = 0
        self._failed = 0

    def __enter__(self) -> "WorkerPool":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.shutdown()

    @property
    def max_workers(self) -> int:
        return self._max_workers

    def _pool(self) -> ThreadPoolExecutor:
        if self._executor is None:
            self._executor = ThreadPoolExecutor(
                max_workers=self._max_workers, thread_name_prefix="semifed-worker"
            )
        return self._executor

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """Apply ``fn`` to every item; exceptions propagate after all tasks finish."""
        items = list(items)
        self._submitted += len(items)
        if self._max_workers == 1 or len(items) <= 1:
            results = []
            for item in items:
                try:
                    results.append(fn(item))
                except Exception:
                    self._failed += 1
                    raise
                self._completed += 1
            return results

        futures = [self._pool().submit(fn, item) for item in items]
        results = []
        first_error: Optional[BaseException] = None
        for future in futures:
            try:
                results.append(future.result())
                self._completed += 1
            except Exception as e:
                self._failed += 1
                if first_error is None:
                    first_error = e
        if first_error is not None:
            raise first_error
        return results

    def shutdown(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None
            logger.debug("Worker pool shut down")

    @property
    def stats(self) -> Dict[str, Any]:
        """Get pool statistics."""
        return {
            "max_workers": self._max_workers,
            "submitted": self._submitted,
            "completed": self._completed,
            "failed": self._failed,
        }


def create_worker_pool(max_workers: int = 1) -> WorkerPool:
    """Factory function to create a worker pool."""
    pool = WorkerPool(max_workers=max_workers)
    logger.debug(f"Created worker pool with {max_workers} worker(s)")
    return pool
