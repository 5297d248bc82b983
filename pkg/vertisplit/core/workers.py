"""Parallélisme par threads avec réduction ordonnée.

Les résultats sont rangés par index d'entrée: le nombre de workers ne change
jamais la valeur calculée.
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Optional, Sequence, TypeVar

from vertisplit.core.config import default_threads

T = TypeVar("T")
R = TypeVar("R")

# En dessous, le coût du pool dépasse le gain
PARALLEL_MIN_ITEMS = 3


def resolve_threads(threads: Optional[int]) -> int:
    if threads is None:
        return default_threads()
    return max(1, int(threads))


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: Optional[int] = None) -> list[R]:
    """Applique `fn` à chaque élément, résultats dans l'ordre des entrées."""
    workers = resolve_threads(threads)
    if workers <= 1 or len(items) < PARALLEL_MIN_ITEMS:
        return [fn(item) for item in items]

    results: list = [None] * len(items)
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as executor:
        future_to_index = {executor.submit(fn, item): idx for idx, item in enumerate(items)}
        for future in as_completed(future_to_index):
            results[future_to_index[future]] = future.result()
    return results
