import asyncio
import threading
import time

import pytest

from conic_surfaces.pool import SolvePool

SHORT_SLEEP_TIME = 0.05


def sleepy(value, seconds):
    time.sleep(seconds)
    return value


def failing(message):
    raise RuntimeError(message)


@pytest.mark.asyncio
async def test_results_in_key_order():
    pool = SolvePool(max_concurrency=4)
    jobs = [(key, sleepy, (key * 10, SHORT_SLEEP_TIME * (4 - key))) for key in (3, 1, 2, 0)]
    results = await pool.run_all(jobs)
    assert results == [(0, 0), (1, 10), (2, 20), (3, 30)]


@pytest.mark.asyncio
async def test_first_error_in_key_order_is_raised():
    pool = SolvePool(max_concurrency=2)
    jobs = [(2, failing, ("second",)), (1, failing, ("first",)), (0, sleepy, ("ok", 0.0))]
    with pytest.raises(RuntimeError, match="first"):
        await pool.run_all(jobs)
    assert await pool.results() == [(0, "ok")]
    assert sorted(await pool.errors()) == [1, 2]


@pytest.mark.asyncio
async def test_concurrency_is_bounded():
    lock = threading.Lock()
    running = [0]
    peak = [0]

    def tracked(key):
        with lock:
            running[0] += 1
            peak[0] = max(peak[0], running[0])
        time.sleep(SHORT_SLEEP_TIME)
        with lock:
            running[0] -= 1
        return key

    pool = SolvePool(max_concurrency=2)
    results = await pool.run_all([(key, tracked, (key,)) for key in range(6)])
    assert [key for key, _ in results] == list(range(6))
    assert peak[0] <= 2


@pytest.mark.asyncio
async def test_duplicate_key():
    pool = SolvePool()
    await pool.submit("a", sleepy, 1, 0.0)
    with pytest.raises(ValueError):
        await pool.submit("a", sleepy, 2, 0.0)
    await pool.join()
    assert await pool.results() == [("a", 1)]


@pytest.mark.asyncio
async def test_join_timeout():
    pool = SolvePool()
    await pool.submit(0, sleepy, 0, 0.5)
    with pytest.raises(asyncio.TimeoutError):
        await pool.join(timeout=SHORT_SLEEP_TIME)
    assert await pool.results() == []


@pytest.mark.asyncio
async def test_join_without_jobs():
    pool = SolvePool()
    await pool.join()
    assert await pool.run_all([]) == []


def test_max_concurrency_must_be_positive():
    with pytest.raises(ValueError):
        SolvePool(max_concurrency=0)
