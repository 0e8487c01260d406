"""Order-preserving task map over a process pool."""

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def pmap(fn: Callable[[T], R], tasks: Iterable[T], workers: int = 1) -> list[R]:
    """``[fn(t) for t in tasks]``, optionally in ``workers`` processes.

    Results come back in task order. ``fn`` must be picklable and must draw
    randomness only from its task description, so ``workers`` never changes
    the output.
    """
    tasks = list(tasks)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))
