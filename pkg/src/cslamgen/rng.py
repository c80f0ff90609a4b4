"""
Deterministic random streams derived from a master seed.

Every random decision draws from a stream keyed by (master seed, purpose,
agent or agent pair), so output never depends on scheduling or thread count.
"""

import hashlib
from typing import Tuple

import numpy as np

RngStream = np.random.Generator

WALK = "walk"
ODOMETRY = "odometry"
INTRA_LC = "intra_lc"
INTRA_LC_NOISE = "intra_lc_noise"
INTER_LC = "inter_lc"
INTER_LC_NOISE = "inter_lc_noise"


def purpose_key(purpose: str) -> int:
    """Stable 32-bit integer for a purpose tag (independent of PYTHONHASHSEED)."""
    digest = hashlib.blake2b(purpose.encode("utf-8"), digest_size=4).digest()
    return int.from_bytes(digest, "little")


def spawn_key(purpose: str, *indices: int) -> Tuple[int, ...]:
    if any(i < 0 for i in indices):
        raise ValueError(f"Stream indices must be non-negative, got {indices}")
    return (purpose_key(purpose), *indices)


def derive_stream(master_seed: int, purpose: str, *indices: int) -> RngStream:
    """
    Create the random stream for one purpose and agent (or agent pair).

    Args:
        master_seed: Root seed of the dataset
        purpose: Tag such as ``"walk"`` or ``"inter_lc"``
        *indices: Agent index, or the two agent indices of a pair

    Returns:
        A numpy Generator; identical inputs give identical sequences
    """
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=spawn_key(purpose, *indices))
    return np.random.Generator(np.random.PCG64(seq))
