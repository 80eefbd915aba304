"""Seed derivation for reproducible replicate streams.

All randomness in the package flows from a single 64-bit root seed.
Replicate k of a Monte-Carlo loop uses ``mix64(root_seed, k)``, so
replicates form independent, platform-stable streams that can be computed
in any order (or in parallel) without changing the results.
"""

_MASK64 = (1 << 64) - 1

# SplitMix64 increment and mixing constants.
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(seed: int, k: int) -> int:
    """Derive the child seed for replicate ``k`` from ``seed``.

    SplitMix64 finalizer applied to ``seed + (k + 1) * gamma``; pure 64-bit
    integer arithmetic, identical on every platform.
    """
    z = (seed + (k + 1) * _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def child_seeds(seed: int, count: int) -> list[int]:
    """Seeds for replicates 0..count-1."""
    return [mix64(seed, k) for k in range(count)]
