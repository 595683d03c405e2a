"""Seeded random streams with reproducible, independently derivable substreams."""

from __future__ import annotations

import hashlib
import random


def _derive_seed(master_seed: int, tokens: tuple) -> int:
    material = repr((master_seed,) + tokens).encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return int.from_bytes(digest[:8], "big")


class SeededRng:
    """Master random source for one run.

    Every consumer asks for a named substream via `derive`. Substreams are
    plain `random.Random` instances whose seeds depend only on the master
    seed and the token tuple, so draws in one subsystem never shift draws
    in another. The same (seed, tokens) pair always yields the same stream.
    """

    def __init__(self, seed: int):
        if not isinstance(seed, int):
            raise TypeError("seed must be an integer")
        self.seed = seed

    def derive(self, *tokens) -> random.Random:
        return random.Random(_derive_seed(self.seed, tokens))
