"""Deterministic RNG stream derivation.

Every stochastic component draws from a numpy Generator whose seed is a
hash of the master seed plus a tuple of context tokens (backend name, run
index, ...). Streams are therefore order-independent: parallel execution
of cells cannot change any result.
"""
from __future__ import annotations

import hashlib

import numpy as np


def _token(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def derive_seed(*tokens) -> int:
    """Hash an arbitrary token tuple down to a 64-bit seed."""
    payload = "\x1f".join(_token(t) for t in tokens)
    digest = hashlib.sha256(payload.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_rng(*tokens) -> np.random.Generator:
    """Generator seeded from a hashed token tuple."""
    return np.random.default_rng(derive_seed(*tokens))
