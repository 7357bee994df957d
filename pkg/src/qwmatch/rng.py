"""SplitMix64 streams for reproducible Monte-Carlo trials.

Every trial ``i`` of an experiment with master seed ``s`` owns the stream
whose initial state is ``stream_seed(s, i) = mix64(s + (i + 1) * GOLDEN)``
(arithmetic mod 2**64). Each draw advances the state by ``GOLDEN`` and
returns ``mix64(state)``; a uniform double is the top 53 bits times 2**-53.
The same rule is implemented here with Python ints (reference), with numpy
uint64 arrays, and inside the compiled walk kernel.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def stream_seed(master_seed: int, trial_index: int) -> int:
    return mix64((master_seed & MASK64) + (trial_index + 1) * GOLDEN)


class SplitMix64:
    """Scalar reference generator."""

    def __init__(self, state: int):
        self.state = state & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def random(self) -> float:
        return (self.next_u64() >> 11) * INV_2_53


def stream_seeds(master_seed: int, trials: int) -> np.ndarray:
    return np.array([stream_seed(master_seed, i) for i in range(trials)], dtype=np.uint64)


_G = np.uint64(GOLDEN)
_M1 = np.uint64(MIX1)
_M2 = np.uint64(MIX2)
_S30, _S27, _S31, _S11 = (np.uint64(k) for k in (30, 27, 31, 11))


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def uniform_array(states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Advance each uint64 state once; return (new_states, uniforms in [0, 1))."""
    states = states + _G
    u = (mix64_array(states) >> _S11).astype(np.float64) * INV_2_53
    return states, u
