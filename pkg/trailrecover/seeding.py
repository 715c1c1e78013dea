"""
Seed derivation

Every stochastic component draws its seed from one master seed, so a
whole experiment is reproduced from a single integer.
"""

from __future__ import annotations
import zlib
from typing import Union

import numpy as np

SeedPart = Union[int, str]


def derive_seed(*parts: SeedPart) -> int:
    """Mix integers and stage names into a 63-bit seed.

    Strings are hashed with CRC32 so the result does not depend on
    Python's per-process string hash randomisation.
    """
    entropy = []
    for part in parts:
        if isinstance(part, str):
            entropy.append(zlib.crc32(part.encode("utf-8")))
        else:
            entropy.append(int(part) & 0xFFFFFFFFFFFFFFFF)
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1])) & 0x7FFFFFFFFFFFFFFF
