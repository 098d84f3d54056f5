import json
import os
from dataclasses import dataclass, fields
from typing import Any, ClassVar, Dict, Iterable, Optional, TextIO, Tuple

import numpy as np

from seqknap.errors import InstanceParseError, SeqKnapError
from seqknap.instance import Instance, validate_instance

EXAMPLE_PATH = os.path.join(os.path.dirname(__file__), "..", "data", "example.json")


def parse_instance(data: Any) -> Instance:
    """
    Builds an Instance from decoded JSON, reporting the offending field on failure.
    """
    if not isinstance(data, dict):
        raise InstanceParseError("$", "expected an object with 'items' and 'capacities'")
    for key in ("items", "capacities"):
        if key not in data:
            raise InstanceParseError(key, "missing")
        if not isinstance(data[key], list):
            raise InstanceParseError(key, "expected a list")

    for idx, raw in enumerate(data["items"]):
        if not isinstance(raw, dict):
            raise InstanceParseError(f"items[{idx}]", "expected an object")
        for key in ("size", "value", "bound"):
            if key not in raw:
                raise InstanceParseError(f"items[{idx}].{key}", "missing")
    try:
        return validate_instance(data["items"], data["capacities"])
    except InstanceParseError:
        raise
    except SeqKnapError as e:
        raise InstanceParseError(_field_of(str(e)), str(e)) from e


def _field_of(message: str) -> str:
    # validation messages start with "item 3 size" / "capacity 2"
    words = message.split()
    if len(words) >= 2 and words[0] == "item" and words[1].isdigit():
        field = f"items[{int(words[1]) - 1}]"
        if len(words) >= 3 and words[2].rstrip(":") in ("size", "value", "bound"):
            field += f".{words[2].rstrip(':')}"
        return field
    if len(words) >= 2 and words[0] == "capacity" and words[1].isdigit():
        return f"capacities[{int(words[1]) - 1}]"
    return "$"


def loads_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceParseError(f"line {e.lineno} column {e.colno}", e.msg) from e
    return parse_instance(data)


def load_instance(path: str) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return loads_instance(fh.read())


def dumps_instance(instance: Instance) -> str:
    """
    Canonical JSON text: original item order, sorted keys, two-space indent.
    """
    return json.dumps(instance.to_dict(), indent=2, sort_keys=True)


def dump_json(payload: Dict[str, Any], stream: Optional[TextIO] = None, path: Optional[str] = None) -> None:
    text = json.dumps(payload, indent=2)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    elif stream is not None:
        stream.write(text + "\n")


def load_example() -> Instance:
    return load_instance(EXAMPLE_PATH)


@dataclass(frozen=True)
class RandomParams:
    max_types: int = 5
    max_knapsacks: int = 3
    chain: Tuple[int, ...] = (1, 2, 4, 8)
    bound_cap: int = 3
    capacity_cap: int = 12
    value_cap: int = 20

    ALIASES: ClassVar[Dict[str, str]] = {
        "n": "max_types",
        "m": "max_knapsacks",
        "bound": "bound_cap",
        "cap": "capacity_cap",
        "value": "value_cap",
    }

    def __post_init__(self):
        if min(self.max_types, self.max_knapsacks, self.bound_cap, self.value_cap) < 1:
            raise ValueError("random instance caps must be positive")
        if self.capacity_cap < 0:
            raise ValueError("capacity_cap must be non-negative")
        if not self.chain or self.chain[0] != 1:
            raise ValueError(f"size chain must start at 1, got {self.chain}")
        for small, large in zip(self.chain, self.chain[1:]):
            if large <= small or large % small:
                raise ValueError(f"size chain {self.chain} is not strictly divisible")

    @classmethod
    def from_pairs(cls, pairs: Iterable[str]) -> "RandomParams":
        """
        Reads `key=value` strings such as n=4, m=2 or chain=1,2,4.
        """
        known = {f.name for f in fields(cls)}
        kwargs: Dict[str, Any] = {}
        for pair in pairs:
            key, sep, raw = pair.partition("=")
            key = cls.ALIASES.get(key.strip(), key.strip())
            if not sep or key not in known:
                raise ValueError(f"unknown random parameter {pair!r}")
            try:
                if key == "chain":
                    kwargs[key] = tuple(int(v) for v in raw.split(","))
                else:
                    kwargs[key] = int(raw)
            except ValueError:
                raise ValueError(f"random parameter {pair!r} is not an integer")
        return cls(**kwargs)


def gen_random(seed: int, params: Optional[RandomParams] = None) -> Instance:
    """
    A random valid instance, deterministic per (seed, params). The first item always has size 1.
    """
    params = params or RandomParams()
    rng = np.random.default_rng(seed)
    upper = [s for s in params.chain[1:] if rng.random() < 0.5]
    sizes = [1] + upper

    n = int(rng.integers(1, params.max_types + 1))
    m = int(rng.integers(1, params.max_knapsacks + 1))
    items = [
        (
            1 if j == 0 else int(rng.choice(sizes)),
            int(rng.integers(1, params.value_cap + 1)),
            int(rng.integers(1, params.bound_cap + 1)),
        )
        for j in range(n)
    ]
    capacities = [int(c) for c in rng.integers(0, params.capacity_cap + 1, size=m)]
    return validate_instance(items, capacities)


if __name__ == "__main__":
    print(dumps_instance(load_example()))
