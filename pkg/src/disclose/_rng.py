"""Deterministic random streams.

Every seeded stage draws from ``numpy.random.PCG64`` seeded through a
``SeedSequence`` built from the user seed plus a fixed stream key, so each
stage gets an independent stream that does not depend on call order.
"""

import numpy as np

GENERATOR_NAME = "numpy.random.PCG64"

STREAM_BALANCE = 1
STREAM_SPLIT = 2
STREAM_FOREST = 3
STREAM_KERNEL = 4
STREAM_TEMPORAL = 5


def make_rng(seed, *stream):
    if seed is None or int(seed) < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
    entropy = [int(seed), *(int(s) for s in stream)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def generator_identity():
    return {
        "bit_generator": GENERATOR_NAME,
        "seeding": "numpy.random.SeedSequence([seed, stream, ...])",
        "numpy_version": np.__version__,
    }
