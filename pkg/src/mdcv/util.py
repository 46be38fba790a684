"""Small shared helpers: deterministic seed mixing."""

from __future__ import annotations

_MASK = (1 << 64) - 1


def mix_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed (splitmix64 finalizer per part),
    so neighboring (setting, replicate) pairs are decorrelated."""
    acc = 0x9E3779B97F4A7C15
    for part in parts:
        z = (acc + (int(part) & _MASK) * 0xBF58476D1CE4E5B9) & _MASK
        z ^= z >> 30
        z = (z * 0x94D049BB133111EB) & _MASK
        z ^= z >> 31
        z = (z * 0xD6E8FEB86659FD93) & _MASK
        z ^= z >> 32
        acc = z
    return acc
