"""Deterministic splittable random streams.

Every stochastic operation in the package takes a ``seed`` argument that is
either a Python integer or an already-constructed ``numpy.random.Generator``.
Integers are mapped to counter-based Philox streams, so a master seed plus an
index path (e.g. a trial number) yields independent substreams whose output
does not depend on scheduling order.
"""

from __future__ import annotations

import numpy as np

def stream(seed, *path: int) -> np.random.Generator:
    """Generator for ``seed``, split along an optional integer index path.

    Passing a Generator returns it unchanged (the caller owns sub-splitting);
    ``path`` applies only to integer seeds.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1),
                                spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))
