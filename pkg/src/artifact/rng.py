"""Seedable, splittable random streams.

Every sampler owns one ``RandomStream``.  Streams are derived from a root
seed through :class:`numpy.random.SeedSequence`, so sibling streams are
statistically independent and a run is replayable from its seed alone.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 2048


class RandomStream:
    """Buffered uniform source on top of a PCG64 generator.

    Scalar draws from numpy are slow; this pulls blocks of doubles and hands
    them out one at a time.  The sequence depends only on the seed.
    """

    __slots__ = ("_seq", "generator", "_buf", "_pos")

    def __init__(self, seed: int | np.random.SeedSequence | None = 0):
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
        else:
            if seed is not None and not 0 <= int(seed) < 2**64:
                raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
            self._seq = np.random.SeedSequence(seed)
        self.generator = np.random.Generator(np.random.PCG64(self._seq))
        self._buf: list[float] = []
        self._pos = 0

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        if self._pos >= len(self._buf):
            self._buf = self.generator.random(_BLOCK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        i = int(self.random() * n)
        return i if i < n else n - 1

    def choice_index(self, weights) -> int:
        """Index drawn proportionally to nonnegative ``weights``."""
        total = 0.0
        for w in weights:
            total += w
        target = self.random() * total
        acc = 0.0
        last = 0
        for i, w in enumerate(weights):
            if w <= 0.0:
                continue
            acc += w
            last = i
            if target < acc:
                return i
        return last

    def spawn(self, n: int) -> list["RandomStream"]:
        """``n`` independent child streams."""
        return [RandomStream(child) for child in self._seq.spawn(n)]

    def child(self) -> "RandomStream":
        return self.spawn(1)[0]


def as_stream(rng: RandomStream | int | None) -> RandomStream:
    if isinstance(rng, RandomStream):
        return rng
    return RandomStream(rng)
