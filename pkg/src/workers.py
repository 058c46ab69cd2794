import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Any, Callable, Iterator, List, Optional, Sequence

DEFAULT_WORKERS = int(os.getenv("CRITLINE_WORKERS", "4"))

ProgressCallback = Callable[[int, int, int, int], None]

# builds a callback for runs that were not given one: factory(label, total)
_progress_factory: Optional[Callable[[str, int], ProgressCallback]] = None


@contextmanager
def reporting(factory: Callable[[str, int], ProgressCallback]) -> Iterator[None]:
    """Attach progress reporting to every run_concurrent call inside the block."""
    global _progress_factory
    previous = _progress_factory
    _progress_factory = factory
    try:
        yield
    finally:
        _progress_factory = previous


def run_concurrent(
    fn: Callable[[Any], Any],
    items: Sequence[Any],
    max_workers: Optional[int] = None,
    progress_callback: Optional[ProgressCallback] = None,
    label: str = "tasks",
    raise_on_error: bool = True,
) -> List[Any]:
    """Apply fn to every item on a thread pool, results in input order.

    Failed items are logged and come back as None when raise_on_error is False.
    """
    total = len(items)
    if total == 0:
        return []
    workers = max(1, min(max_workers or DEFAULT_WORKERS, total))
    if progress_callback is None and _progress_factory is not None:
        progress_callback = _progress_factory(label, total)
    start_time = time.time()

    results: List[Any] = [None] * total
    successful = 0
    failed = 0
    first_error: Optional[BaseException] = None

    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {executor.submit(fn, item): i for i, item in enumerate(items)}

        # walk futures in submission order so callbacks see a stable sequence
        for done, future in enumerate(future_to_index, start=1):
            i = future_to_index[future]
            try:
                results[i] = future.result()
                successful += 1
            except Exception as e:
                failed += 1
                logging.warning(f"{label}: item {i} ({items[i]!r}) failed: {e}")
                if first_error is None:
                    first_error = e
            if progress_callback:
                progress_callback(done, total, successful, failed)

    elapsed = time.time() - start_time
    logging.debug(f"{label}: {successful}/{total} done in {elapsed:.2f}s on {workers} threads")

    if first_error is not None and raise_on_error:
        raise first_error
    return results
