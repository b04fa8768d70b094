"""Counter-based random number streams.

A draw is a pure function of (seed, replica_id, counter), so trajectories
replay byte-identically no matter how replicas are scheduled or how many
draws other code paths consume.  The counter is conventionally split as
counter = step * 2^32 + slot, which lets simulation code address "the
uniform for particle k at step t" directly; skipping a slot (e.g. for a
frozen particle) does not shift any other draw.

The generator is the splitmix64 output function: position n of the stream
keyed by `key` is mix64(key + (n+1) * GOLDEN).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_REPLICA_SALT = 0x632BE59BD9B4E019

_U64_GOLDEN = np.uint64(_GOLDEN)
_U64_MIX1 = np.uint64(_MIX1)
_U64_MIX2 = np.uint64(_MIX2)
_INV_2_53 = 2.0**-53

STEP_STRIDE = 1 << 32  # counter slots reserved per time step


def mix64(z: int) -> int:
    """splitmix64 finalizer on 64-bit integers."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def stream_key(seed: int, replica_id: int) -> int:
    """Well-separated 64-bit key for one replica's stream."""
    return mix64((seed & _MASK) ^ mix64(((replica_id + 1) * _GOLDEN + _REPLICA_SALT) & _MASK))


def uniform_at(key: int, counter: int) -> float:
    """The uniform in [0,1) at an absolute stream position."""
    z = (key + ((counter + 1) & _MASK) * _GOLDEN) & _MASK
    return (mix64(z) >> 11) * _INV_2_53


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _U64_MIX1
    z = (z ^ (z >> np.uint64(27))) * _U64_MIX2
    return z ^ (z >> np.uint64(31))


def uniforms_at(key: int, counters: np.ndarray) -> np.ndarray:
    """Vectorized uniform_at over an array of counters."""
    c = counters.astype(np.uint64) + np.uint64(1)
    z = np.uint64(key) + c * _U64_GOLDEN
    return (_mix64_np(z) >> np.uint64(11)).astype(np.float64) * _INV_2_53


@dataclass
class RngStream:
    """Replayable stream: output is a pure function of (seed, replica_id,
    counter).  `next()` walks the counter sequentially; `at(t, slot)`
    addresses the (step, slot) grid used by the particle dynamics."""

    seed: int
    replica_id: int = 0
    counter: int = 0
    key: int = field(init=False, repr=False)

    def __post_init__(self):
        self.key = stream_key(self.seed, self.replica_id)

    def next(self) -> float:
        u = uniform_at(self.key, self.counter)
        self.counter += 1
        return u

    def at(self, t: int, slot: int) -> float:
        return uniform_at(self.key, t * STEP_STRIDE + slot)

    def at_many(self, t: int, slots: np.ndarray) -> np.ndarray:
        counters = np.uint64(t) * np.uint64(STEP_STRIDE) + slots.astype(np.uint64)
        return uniforms_at(self.key, counters)
