"""Deterministic seed derivation.

Every sampled quantity is drawn from ``numpy.random.PCG64`` seeded with
``derive_seed(base, stream)``: the base seed XOR the stream (trial) index,
passed through one SplitMix64 round.  A draw is therefore a pure function
of ``(base seed, stream index)``.
"""
import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(base: int, stream: int) -> int:
    if not (0 <= base <= MASK64):
        raise ValueError(f"seed {base} is not an unsigned 64-bit integer")
    return splitmix64((base ^ stream) & MASK64)


def generator(base: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(base, stream)))
