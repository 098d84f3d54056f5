import logging
import os
import re
from fractions import Fraction
from typing import Dict, Hashable, Iterator, List, Optional, Sequence, Tuple, Union

from seqknap.errors import NonPositiveField

LOG_ENV = "SEQKNAP_LOG"

_FRACTION_RE = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?$")


def get_logger(name: str) -> logging.Logger:
    """
    Returns a module logger; the root level comes from the SEQKNAP_LOG environment variable.
    """
    if not logging.getLogger().handlers:
        level = os.environ.get(LOG_ENV, "WARNING").upper()
        logging.basicConfig(
            level=getattr(logging, level, logging.WARNING)
            if level in ("DEBUG", "INFO", "WARNING", "ERROR")
            else logging.WARNING,
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        )
    return logging.getLogger(name)


def parse_value(raw: Union[int, str, Fraction]) -> Fraction:
    """
    Reads an exact rational from an int or a "num/den" string. Floats are refused.
    """
    if isinstance(raw, bool):
        raise NonPositiveField(f"value must be an integer or 'num/den', got {raw!r}")
    if isinstance(raw, (int, Fraction)):
        return Fraction(raw)
    if isinstance(raw, str):
        match = _FRACTION_RE.match(raw)
        if match:
            den = int(match.group(2)) if match.group(2) else 1
            if den == 0:
                raise NonPositiveField(f"zero denominator in {raw!r}")
            return Fraction(int(match.group(1)), den)
    raise NonPositiveField(f"value must be an integer or 'num/den', got {raw!r}")


def format_value(value: Fraction) -> Union[int, str]:
    if value.denominator == 1:
        return value.numerator
    return f"{value.numerator}/{value.denominator}"


def ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def floor_to(a: int, step: int) -> int:
    return (a // step) * step


def greedy_extract(sizes: Sequence[int], target: int) -> List[int]:
    """
    Picks positions of `sizes` whose total is exactly `target`, largest sizes first.

    With divisible sizes, the largest size dividing `target` and `target <= sum(sizes)`,
    the greedy scan never gets stuck: the residual stays a multiple of every size still to come.
    Raises ValueError when no exact subset exists.
    """
    order = sorted(range(len(sizes)), key=lambda i: (-sizes[i], i))
    chosen = []
    residual = target
    for i in order:
        if sizes[i] <= residual:
            chosen.append(i)
            residual -= sizes[i]
        if residual == 0:
            break
    if residual != 0:
        raise ValueError(f"no subset of {list(sizes)} sums to {target}")
    return sorted(chosen)


def bounded_multisets(
    pool: Sequence[Tuple[Hashable, int, int]],
    limit: int,
    max_items: Optional[int] = None,
) -> Iterator[Tuple[Dict[Hashable, int], int, int]]:
    """
    Yields every non-empty sub-multiset of `pool` with total size at most `limit`.

    `pool` holds (key, size, available count). Each yield is (counts, total size, item count).
    """
    chosen: Dict[Hashable, int] = {}

    def walk(pos: int, size: int, items: int):
        if pos == len(pool):
            if items:
                yield dict(chosen), size, items
            return
        key, unit, available = pool[pos]
        take = 0
        while take <= available and size + take * unit <= limit:
            if max_items is not None and items + take > max_items:
                break
            if take:
                chosen[key] = take
            yield from walk(pos + 1, size + take * unit, items + take)
            take += 1
        chosen.pop(key, None)

    yield from walk(0, 0, 0)


def pack_chunks(sizes: Sequence[int], chunk: int) -> List[List[int]]:
    """
    Splits item positions into chunks of total size at most `chunk`.

    Every size must divide `chunk`. Items go in largest first, so only the last chunk can be
    left partly empty and the chunk count is ceil(sum(sizes) / chunk).
    """
    if any(chunk % s for s in sizes):
        raise ValueError(f"chunk {chunk} is not a multiple of every size")
    chunks: List[List[int]] = []
    room = 0
    for i in sorted(range(len(sizes)), key=lambda i: (-sizes[i], i)):
        if sizes[i] > room:
            chunks.append([])
            room = chunk
        chunks[-1].append(i)
        room -= sizes[i]
    return chunks
