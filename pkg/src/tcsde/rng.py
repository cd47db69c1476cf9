"""Random streams.

Every sampling routine takes a :class:`numpy.random.Generator` explicitly;
there is no module-level state. Streams are built on the counter-based
Philox bit generator and keyed by a tuple of non-negative integers, so a
(master seed, delta index, path index) triple always yields the same draws
no matter which process or in which order it is consumed.

Independent sub-streams are derived by *label* rather than by spawn
counters: ``substream(rng, SUBORDINATOR)`` returns the same child every
time it is called on a generator with the same key.
"""

from __future__ import annotations

from numpy.random import Generator, Philox, SeedSequence

# fixed sub-stream labels
SUBORDINATOR = 0
BROWNIAN = 1


def make_stream(*key: int) -> Generator:
    """Return a Philox generator keyed by ``key`` (at least one integer)."""
    if not key:
        raise ValueError("make_stream needs at least one key component")
    if any(int(k) < 0 for k in key):
        raise ValueError(f"stream key components must be non-negative, got {key}")
    entropy, *rest = (int(k) for k in key)
    return Generator(Philox(SeedSequence(entropy, spawn_key=tuple(rest))))


def substream(rng: Generator, label: int) -> Generator:
    """Child stream of ``rng`` identified by ``label``.

    Deterministic in (key of ``rng``, ``label``) and independent of how many
    draws ``rng`` itself has already produced.
    """
    seq = rng.bit_generator.seed_seq
    if not isinstance(seq, SeedSequence):
        raise TypeError("substream requires a generator seeded from a SeedSequence")
    child = SeedSequence(seq.entropy, spawn_key=tuple(seq.spawn_key) + (int(label),))
    return Generator(type(rng.bit_generator)(child))


__all__ = ["SUBORDINATOR", "BROWNIAN", "make_stream", "substream"]
