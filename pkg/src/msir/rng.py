"""Seeded random number generation.

All randomness in the package flows through the Philox 4x64 counter-based
bit generator, keyed through ``numpy.random.SeedSequence``.  Independent
streams for sub-tasks (replications, partitions) are derived with
:func:`child_seed`, so results never depend on evaluation order or worker
count.  Normal variates are produced by inverse-CDF sampling from an
open-interval uniform.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .errors import MsirError

_U53 = float(2**53)


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise MsirError(f"seed must be a nonnegative integer, got {seed!r}")
    return int(seed)


def make_rng(seed: int) -> np.random.Generator:
    """Return a Philox-backed generator keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_check_seed(seed))))


def child_seed(seed: int, index: int) -> int:
    """Derive a stable sub-seed for stream ``index`` under ``seed``.

    Uses ``SeedSequence((seed, index))`` so that distinct (seed, index)
    pairs give statistically independent streams and the derivation is
    reproducible across platforms.
    """
    if index < 0:
        raise MsirError(f"stream index must be nonnegative, got {index}")
    ss = np.random.SeedSequence((_check_seed(seed), int(index)))
    return int(ss.generate_state(1, np.uint64)[0])


def open_uniform(rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform draws strictly inside (0, 1): midpoints of the 2^53 grid."""
    k = rng.integers(0, 2**53, size=size, dtype=np.int64)
    return (k + 0.5) / _U53


def standard_normal(rng: np.random.Generator, size=None) -> np.ndarray:
    """Standard normal draws via the inverse CDF applied to open uniforms."""
    return ndtri(open_uniform(rng, size=size))
