"""Seed derivation and generator construction.

Every random stream in the package comes from a Philox4x64-10 generator keyed
by a 64-bit child seed. Child seeds are a BLAKE2b digest of
``(master_seed, purpose, index)``, so a stream depends only on its own label
and never on how many other streams were drawn before it or on which worker
drew it.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master_seed: int, purpose: str, index: int = 0) -> int:
    """Return a stable 64-bit child seed for ``(master_seed, purpose, index)``."""
    payload = f"{int(master_seed)}|{purpose}|{int(index)}".encode()
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_rng(seed: int, purpose: str = "stream", index: int = 0) -> np.random.Generator:
    """Build a Philox generator keyed by the child seed of ``seed``."""
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, purpose, index)))
