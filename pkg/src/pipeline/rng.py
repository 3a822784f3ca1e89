"""Named random substreams derived from one global seed."""
import zlib
from typing import Union

import numpy as np

Name = Union[str, int]


def _entropy(seed: int, names: tuple[Name, ...]) -> list[int]:
    words = [int(seed) & 0xFFFFFFFF]
    for name in names:
        if isinstance(name, int):
            words.append(name & 0xFFFFFFFF)
        else:
            words.append(zlib.crc32(str(name).encode("utf-8")))
    return words


def substream(seed: int, *names: Name) -> np.random.Generator:
    """Generator for the stream ``seed/names...``.

    The same (seed, names) always yields the same stream, and streams with
    different names are statistically independent.
    """
    return np.random.default_rng(np.random.SeedSequence(_entropy(seed, names)))


def derive_seed(seed: int, *names: Name) -> int:
    """Integer seed for APIs that take a seed rather than a generator."""
    return int(np.random.SeedSequence(_entropy(seed, names)).generate_state(1, dtype=np.uint32)[0])
