"""Seeded random substreams.

Every random draw in the package comes from numpy's PCG64 bit generator.
Sample ``k`` of a campaign seeded with ``seed`` uses

    PCG64(SeedSequence(entropy=seed, spawn_key=(k,)))

i.e. the ``k``-th child that ``SeedSequence(seed).spawn`` would hand out.
SeedSequence hashes (entropy, spawn_key) into the PCG64 state, so substreams
are statistically independent and depend only on ``(seed, k)``, never on the
order or the worker that evaluates them.
"""
import numpy as np

SEED_MASK = (1 << 64) - 1


def substream(seed: int, index: int) -> np.random.Generator:
    """Generator for sample ``index`` of the campaign seeded by ``seed``."""
    if index < 0:
        raise ValueError(f"sample index must be nonnegative, got {index}")
    ss = np.random.SeedSequence(entropy=int(seed) & SEED_MASK, spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))
