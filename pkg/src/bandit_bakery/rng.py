"""Deterministic, splittable random streams.

All randomness in the package flows through numpy's PCG64 generator,
seeded through ``SeedSequence`` so that one integer seed splits into
independent named sub-streams (dataset shuffling, action sampling,
tie-breaking, Poisson resampling). Identical seeds give bitwise-identical
streams, which is what makes whole sweeps reproducible.
"""

from dataclasses import dataclass

import numpy as np

# Fixed spawn order; changing it changes every seeded run.
_COMPONENTS = ("sampling", "tiebreak", "poisson")


@dataclass
class RunStreams:
    """The per-run sub-streams consumed by the exploration loop."""

    sampling: np.random.Generator
    tiebreak: np.random.Generator
    poisson: np.random.Generator


def run_streams(seed: int) -> RunStreams:
    """Split one run seed into the named component streams."""
    children = np.random.SeedSequence(seed).spawn(len(_COMPONENTS))
    gens = {name: np.random.Generator(np.random.PCG64(ss))
            for name, ss in zip(_COMPONENTS, children)}
    return RunStreams(**gens)


def shuffle_stream(seed: int) -> np.random.Generator:
    """Stream used exclusively for dataset shuffling (own seed flag)."""
    ss = np.random.SeedSequence(seed, spawn_key=(0xD5,))
    return np.random.Generator(np.random.PCG64(ss))


def single_stream(seed: int) -> np.random.Generator:
    """One standalone generator, for tests and simple tools."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
