"""
pool

Pool of concurrent solves. Independent computations (Fourier modes, acceptance criteria, specs
handed to the command line) are run in worker threads; results are merged in deterministic key
order regardless of completion order.
"""

import asyncio
from typing import Any
from typing import Callable
from typing import Dict
from typing import Hashable
from typing import Iterable
from typing import List
from typing import Optional
from typing import Tuple

from .logger import setup_logger

logger = setup_logger(name="SolvePool")

Job = Tuple[Hashable, Callable[..., Any], tuple]


class SolvePool:
    """
    Runs blocking solver calls in threads, at most `max_concurrency` at a time.

    Results and errors are kept by key. Keys must be sortable; `results()` returns them sorted so
    that the merged output does not depend on scheduling.
    """

    def __init__(self, max_concurrency: int = 4):
        if max_concurrency < 1:
            raise ValueError("max_concurrency must be at least 1")
        self._semaphore = asyncio.Semaphore(max_concurrency)
        # Results and errors by key. Protected by self._mutex
        self._results: Dict[Hashable, Any] = {}
        self._errors: Dict[Hashable, BaseException] = {}
        self._tasks: Dict[Hashable, asyncio.Task] = {}
        self._mutex = asyncio.Lock()

    async def _run(self, key: Hashable, fn: Callable[..., Any], args: tuple):
        async with self._semaphore:
            logger.debug(f"Starting solve {key}")
            try:
                result = await asyncio.to_thread(fn, *args)
            except Exception as e:
                logger.warning(f"Solve {key} failed: {e}")
                async with self._mutex:
                    self._errors[key] = e
                return
            async with self._mutex:
                self._results[key] = result
            logger.debug(f"Finished solve {key}")

    async def submit(self, key: Hashable, fn: Callable[..., Any], *args) -> asyncio.Task:
        async with self._mutex:
            if key in self._tasks:
                raise ValueError(f"Duplicate solve key {key}")
            task = asyncio.create_task(self._run(key, fn, args))
            self._tasks[key] = task
        return task

    async def join(self, timeout: Optional[float] = None):
        """
        Waits for every submitted solve. On timeout, pending solves are cancelled (threads already
        running finish in the background; their results are discarded).
        """
        async with self._mutex:
            tasks = list(self._tasks.values())
        if not tasks:
            return
        try:
            await asyncio.wait_for(asyncio.gather(*tasks), timeout=timeout)
        except asyncio.TimeoutError:
            logger.warning(f"Timeout after {timeout}s waiting for {len(tasks)} solves")
            for task in tasks:
                task.cancel()
            await asyncio.gather(*tasks, return_exceptions=True)
            raise

    async def results(self) -> List[Tuple[Hashable, Any]]:
        async with self._mutex:
            return sorted(self._results.items(), key=lambda item: item[0])

    async def errors(self) -> Dict[Hashable, BaseException]:
        async with self._mutex:
            return dict(self._errors)

    async def run_all(
        self, jobs: Iterable[Job], timeout: Optional[float] = None
    ) -> List[Tuple[Hashable, Any]]:
        """
        Submits every job, waits for all of them and returns (key, result) pairs in key order.
        The first error (in key order) is re-raised.
        """
        for key, fn, args in jobs:
            await self.submit(key, fn, *args)
        await self.join(timeout=timeout)
        errors = await self.errors()
        if errors:
            first = sorted(errors)[0]
            raise errors[first]
        return await self.results()
