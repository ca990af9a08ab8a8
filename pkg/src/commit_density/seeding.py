"""Derived seeds: one user seed fans out to independent per-component streams."""

from __future__ import annotations

import zlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFF
    return zlib.crc32(str(part).encode("utf-8"))


def derive_seed(seed: int, *keys) -> int:
    """A 32-bit seed fixed by ``seed`` and the key path, independent of call order."""
    ss = np.random.SeedSequence([_key(seed), *(_key(k) for k in keys)])
    return int(ss.generate_state(1)[0])


def rng(seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *keys))
