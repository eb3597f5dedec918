"""Seeded random streams.

Every Monte Carlo replication draws from its own generator, keyed by
``(seed, *key)``; results therefore do not depend on the order or the
process in which replications are evaluated.  The bit generator is
numpy's PCG64 fed through a ``SeedSequence``.
"""

import numpy as np


def stream(seed, *key):
    """Return an independent ``numpy.random.Generator`` for ``(seed, key)``."""
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
