"""Counter-based random numbers for reproducible chains.

Every Markov chain owns one SplitMix64 stream (a Weyl counter plus an
avalanching mixer, period 2^64).  The same generator is implemented in the
compiled kernels, so a chain advanced by the Cython backend and one advanced
by the pure-Python fallback consume bit-identical random numbers.

Stream-splitting rule: a root seed plus a task key (e.g. the index of a
(size, temperature, replica) sweep point) is expanded through
``numpy.random.SeedSequence(root_seed, spawn_key=key)``, which guarantees
independent streams regardless of how tasks are scheduled across workers.
"""

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53


def mix64(z: int) -> int:
    """SplitMix64 output function for a 64-bit state value."""
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Seedable deterministic generator shared with the compiled kernels."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        return mix64(self.state)

    def uniform(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n).  Modulo bias is < n/2^64."""
        return self.next_u64() % n

    def coin(self) -> bool:
        return self.uniform() < 0.5


def stream_seed(root_seed: int, *key: int) -> int:
    """Derive the 64-bit stream seed for one task.

    ``stream_seed(s)`` whitens a user seed for a single chain;
    ``stream_seed(s, i, ...)`` derives the independent stream for task
    ``(i, ...)`` of a sweep.  Keyed by task identity, never by schedule.
    """
    ss = np.random.SeedSequence(root_seed, spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])
