"""Seeded random streams.

Every random quantity comes from a PCG64 generator whose SeedSequence is keyed
by ``(purpose, index)`` under the user's master seed. Streams are therefore
independent of each other and of the order in which they are requested, so
running sweep points or panels concurrently never changes results.
"""
import numpy as np

BIT_GENERATOR = "PCG64"
STREAM_VERSION = 1

CODEBOOK = 0
SOURCE_PHASE = 1
NOISE = 2
REPETITION = 3
TRIAL = 4


def stream(seed, purpose, index=0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(STREAM_VERSION, int(purpose), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed, purpose, index=0) -> int:
    """A new 64-bit master seed, for nesting (e.g. one per sweep repetition)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(STREAM_VERSION, int(purpose), int(index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
