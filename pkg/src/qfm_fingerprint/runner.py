#!/usr/bin/env python3

import asyncio
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


class WorkerPool:
    """Fans independent work items out to worker threads.

    Results always come back in submission order, so anything merged from
    them is identical for every worker count.
    """

    def __init__(self, workers: Optional[int] = None):
        self.logger = logging.getLogger("worker_pool")
        self.workers = workers if workers and workers > 0 else (os.cpu_count() or 1)

    async def gather(self, fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
        """Run fn over items on the executor"""
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            tasks = [loop.run_in_executor(executor, fn, item) for item in items]
            try:
                return list(await asyncio.gather(*tasks))
            except Exception as e:
                self.logger.error(f"Worker failed: {e}")
                for task in tasks:
                    task.cancel()
                raise

    def map(self, fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
        """Blocking wrapper around gather"""
        items = list(items)
        if self.workers == 1 or len(items) <= 1:
            return [fn(item) for item in items]
        self.logger.debug(f"Dispatching {len(items)} items to {self.workers} workers")
        return asyncio.run(self.gather(fn, items))


def chunk_ranges(total: int, chunk: int) -> List[range]:
    """Split range(total) into consecutive ranges of at most chunk items"""
    if chunk < 1:
        raise ValueError(f"Chunk size must be positive, got {chunk}")
    return [range(start, min(start + chunk, total)) for start in range(0, total, chunk)]
