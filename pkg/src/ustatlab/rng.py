"""Deterministic random-stream derivation.

Every random draw in the library flows from an explicit integer seed through
a named Philox stream (a counter-based generator).  Streams are keyed by
purpose so that, for example, adding Monte Carlo replicates never perturbs
the draws of existing ones:

* ``PATH``    - sample-path innovations
* ``LATENT``  - the one latent component draw of a mixture path
* ``MC``      - Monte Carlo integration against a limit law
* ``TUPLES``  - index-tuple sampling for incomplete U-statistics

``generator(seed, PATH, 3)`` and ``generator(seed, PATH, 4)`` are
statistically independent streams; both are bit-reproducible functions of
their arguments.
"""

from __future__ import annotations

import numpy as np

PATH = 0
LATENT = 1
MC = 2
TUPLES = 3

_U64 = (1 << 64) - 1


def _seed_sequence(seed: int, key: tuple[int, ...]) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=int(seed) & _U64,
        spawn_key=tuple(int(k) & _U64 for k in key),
    )


def generator(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for the stream named by ``key`` under ``seed``."""
    return np.random.Generator(np.random.Philox(_seed_sequence(seed, key)))


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit child seed for the stream named by ``key`` under ``seed``."""
    return int(_seed_sequence(seed, key).generate_state(1, np.uint64)[0])
