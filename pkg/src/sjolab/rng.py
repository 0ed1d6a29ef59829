"""Seeded random streams shared by the randomized suites."""
import numpy as np

#: Bit generator behind every randomized suite.  Fixed so that a seed
#: reproduces the same test functions on every platform.
BIT_GENERATOR = "PCG64DXSM"


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for ``seed``; distinct ``stream`` values give independent streams."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(int(stream),))
    return np.random.Generator(np.random.PCG64DXSM(ss))
