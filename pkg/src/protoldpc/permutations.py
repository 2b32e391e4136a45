"""Seeded permutation draws shared by protograph expansion and lifting."""

from __future__ import annotations

import numpy as np


def draw_permutations(rng: np.random.Generator, size: int, count: int) -> list[np.ndarray]:
    """Draw ``count`` permutations of ``size``, disjoint whenever possible.

    A permutation is stored as the column index per row.  Two permutations
    are disjoint when they share no (row, column) position, i.e. they
    differ in every row.  Parallel edges must lift to disjoint permutations
    so no ones cancel mod 2; for ``count > size`` disjointness is
    impossible and independent draws are kept (entries then stack, which
    is the intended multi-edge behaviour at the protograph level).
    """
    perms: list[np.ndarray] = []
    require_disjoint = count <= size
    for _ in range(count):
        while True:
            candidate = rng.permutation(size)
            if not require_disjoint:
                break
            if all(not np.any(candidate == p) for p in perms):
                break
        perms.append(candidate)
    return perms


def draw_shifts(rng: np.random.Generator, size: int, count: int) -> list[int]:
    """Draw ``count`` distinct circulant shifts in [0, size)."""
    if count > size:
        raise ValueError(f"cannot draw {count} distinct shifts of size {size}")
    return [int(s) for s in rng.choice(size, size=count, replace=False)]
