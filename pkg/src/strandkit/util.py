"""Small shared helpers: stable integer hashing for order-independent
randomness (lattice noise, per-texel tie breaking) and rng coercion."""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(x):
    """Finalize ``x`` (uint64 scalar or array) with the splitmix64 mixer.

    Pure function of its input, so values derived from (seed, index) are
    reproducible regardless of evaluation order or worker layout.
    """
    z = np.asarray(x, dtype=np.uint64) + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def hash_combine(*parts):
    """Mix several integer scalars/arrays into one uint64 stream."""
    h = np.uint64(0)
    for p in parts:
        h = splitmix64(h ^ np.asarray(p, dtype=np.uint64))
    return h


def hash_unit(*parts):
    """Uniform floats in [0, 1) derived from hashed integer parts."""
    h = hash_combine(*parts)
    return (h >> np.uint64(11)).astype(np.float64) * (2.0**-53)


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, a seed, or None (fresh entropy)."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
