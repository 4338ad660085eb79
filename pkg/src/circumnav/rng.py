"""Named, independently seeded random streams.

Each consumer (target, satellite, measurement noise) gets its own
generator derived from the run seed and a fixed stream name, so adding draws
to one consumer never shifts another's sequence.
"""

import zlib

import numpy as np

STREAMS = ("target", "satellite", "measurement")


def stream(seed: int, name: str) -> np.random.Generator:
    key = zlib.crc32(name.encode("ascii"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), key])))


def streams(seed: int) -> dict:
    return {name: stream(seed, name) for name in STREAMS}
