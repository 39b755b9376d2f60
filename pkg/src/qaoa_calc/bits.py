"""Bitmask helpers shared by the Pauli algebra, cost functions, and simulators.

Conventions (fixed package-wide):
  * qubits / variables are 0-based internally, 1-based in all I/O and rendering;
  * bit q of an integer bitstring x is variable q+1, i.e. least-significant
    bit = variable 1;
  * bitstring text "0110" has variable 1 leftmost.
"""
from __future__ import annotations

import numpy as np

# Masks are stored in int64 arrays; keep headroom for merge keys.
MAX_QUBITS = 30


def popcount(arr: np.ndarray) -> np.ndarray:
    """Per-element popcount of a nonnegative integer array."""
    return np.bitwise_count(arr.astype(np.int64, copy=False)).astype(np.int64)


def parity(arr: np.ndarray) -> np.ndarray:
    """Per-element bit parity (popcount mod 2)."""
    return popcount(arr) & 1


def mask_from_indices(indices) -> int:
    m = 0
    for q in indices:
        m |= 1 << q
    return m


def indices_from_mask(mask: int) -> tuple[int, ...]:
    out = []
    q = 0
    while mask:
        if mask & 1:
            out.append(q)
        mask >>= 1
        q += 1
    return tuple(out)


def bitstring_to_int(s: str) -> int:
    """Parse text like "0110" (variable 1 leftmost) into an integer bitstring."""
    x = 0
    for q, ch in enumerate(s):
        if ch == "1":
            x |= 1 << q
        elif ch != "0":
            raise ValueError(f"invalid bitstring character {ch!r}")
    return x


def int_to_bitstring(x: int, n: int) -> str:
    return "".join("1" if (x >> q) & 1 else "0" for q in range(n))


def flip_neighbors(x: np.ndarray, j: int) -> np.ndarray:
    """x with bit j flipped, elementwise."""
    return x ^ (1 << j)
