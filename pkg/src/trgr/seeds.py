"""Deterministic 64-bit seed derivation (splitmix64 fold)."""
from __future__ import annotations

_M64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _M64
    z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _M64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _M64
    return (z ^ (z >> 31)) & _M64


def mix_seeds(*parts: int) -> int:
    """Order-sensitive mix of integers into one 64-bit seed.

    Used wherever a child seed is derived from (base seed, role, index) so
    generated artifacts do not depend on generation order.
    """
    acc = 0x243F6A8885A308D3
    for p in parts:
        acc = _splitmix64(acc ^ (int(p) & _M64))
    return acc
