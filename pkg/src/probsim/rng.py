"""Reproducible random-stream derivation.

Every random decision in the toolkit draws from an :class:`RngStream`, a
counter-based derivation tree keyed by (stage tag, index) pairs.  Two
streams with the same root seed and path always produce the same values;
streams with different paths are statistically independent.  This makes
results invariant to execution order (serial, threaded or multi-process).
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RngStream:
    """A derivation point in the seed tree.

    `path` is a sequence of (stage-tag, index) pairs; tags are short
    strings ("split", "trainset", ...) hashed with CRC-32 into the
    numpy SeedSequence spawn key, so the mapping is stable across runs
    and platforms.
    """

    root_seed: int
    path: tuple[tuple[str, int], ...] = field(default=())

    def child(self, tag: str, index: int = 0) -> "RngStream":
        """Derive the sub-stream for one (stage, index) step."""
        if index < 0:
            raise ValueError("stream index must be non-negative")
        return RngStream(self.root_seed, self.path + ((tag, index),))

    def _seed_sequence(self) -> np.random.SeedSequence:
        key: list[int] = []
        for tag, index in self.path:
            key.append(zlib.crc32(tag.encode("utf-8")))
            key.append(index)
        return np.random.SeedSequence(entropy=self.root_seed, spawn_key=tuple(key))

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        return np.random.Generator(np.random.PCG64(self._seed_sequence()))

    def token(self) -> int:
        """A 64-bit reproducibility token identifying this stream."""
        return int(self._seed_sequence().generate_state(1, np.uint64)[0])
