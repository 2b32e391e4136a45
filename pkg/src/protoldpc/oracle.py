"""Exact small-instance computations used to cross-check the fast paths.

Everything here favours brute-force certainty over speed: GF(2)
elimination on bit-packed rows, exhaustive weight spectra by
meet-in-the-middle enumeration, truncated-window free-distance
witnesses, and exact even-overlap counts by dynamic programming over
columns with big integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .lift import LiftSpec, SparseBinaryMatrix, assemble_tailbiting, assemble_window, lift_pair
from .protograph import Protograph
from .unwrap import Unwrapping

DEFAULT_K_LIMIT = 28


class DimensionTooLargeError(ValueError):
    """Nullspace dimension exceeds the exhaustive enumeration limit."""


def _rref_bits(row_bits: list[int], n_cols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form over GF(2); returns (pivot rows, pivot cols)."""
    rows = [bits for bits in row_bits if bits]
    reduced: list[int] = []
    pivots: list[int] = []
    for col in range(n_cols):
        mask = 1 << col
        src = next((i for i, bits in enumerate(rows) if bits & mask), None)
        if src is None:
            continue
        pivot = rows.pop(src)
        rows = [bits ^ pivot if bits & mask else bits for bits in rows]
        reduced = [bits ^ pivot if bits & mask else bits for bits in reduced]
        reduced.append(pivot)
        pivots.append(col)
        if not rows:
            break
    return reduced, pivots


def rank(H: SparseBinaryMatrix) -> int:
    return len(_rref_bits(H.row_bits, H.cols)[1])


def nullspace_bits(H: SparseBinaryMatrix) -> list[int]:
    """Basis of the right nullspace as column bitsets."""
    reduced, pivots = _rref_bits(H.row_bits, H.cols)
    pivot_set = set(pivots)
    basis = []
    for free in range(H.cols):
        if free in pivot_set:
            continue
        word = 1 << free
        for bits, pcol in zip(reduced, pivots):
            if bits >> free & 1:
                word |= 1 << pcol
        basis.append(word)
    return basis


def nullspace_basis(H: SparseBinaryMatrix) -> np.ndarray:
    """Nullspace basis as a (k, n) uint8 array."""
    words = nullspace_bits(H)
    out = np.zeros((len(words), H.cols), dtype=np.uint8)
    for i, word in enumerate(words):
        while word:
            low = word & -word
            out[i, low.bit_length() - 1] = 1
            word ^= low
    return out


def _pack_words(values: list[int], n_cols: int) -> np.ndarray:
    n_words = max(1, -(-n_cols // 64))
    mask = (1 << 64) - 1
    out = np.empty((len(values), n_words), dtype=np.uint64)
    for w in range(n_words):
        shift = 64 * w
        out[:, w] = [(v >> shift) & mask for v in values]
    return out


def _gray_span(basis: list[int]) -> list[int]:
    """All 2^k XOR combinations of the basis, in Gray-code order."""
    vals = [0] * (1 << len(basis))
    cur = 0
    for i in range(1, len(vals)):
        cur ^= basis[(i & -i).bit_length() - 1]
        vals[i] = cur
    return vals


def _split_halves(basis: list[int], n_cols: int) -> tuple[np.ndarray, list[int]]:
    k_inner = min(len(basis), 18)
    inner = _pack_words(_gray_span(basis[:k_inner]), n_cols)
    outer = _gray_span(basis[k_inner:])
    return inner, outer


@dataclass(frozen=True)
class ExactSpectrum:
    """Exhaustive weight distribution of a code."""

    counts: np.ndarray
    dimension: int
    n: int

    @property
    def d_min(self) -> int | None:
        nz = np.flatnonzero(self.counts[1:])
        return int(nz[0]) + 1 if nz.size else None

    def nonzero(self) -> dict[int, int]:
        return {int(d): int(self.counts[d]) for d in np.flatnonzero(self.counts)}


def exact_spectrum(H: SparseBinaryMatrix, k_limit: int = DEFAULT_K_LIMIT) -> ExactSpectrum:
    """Full weight spectrum by enumerating all 2^k codewords.

    Enumeration is meet-in-the-middle: one half of the basis is expanded
    into a packed array once, the other half is walked in Gray-code
    order with vectorized popcounts.
    """
    basis = nullspace_bits(H)
    k = len(basis)
    if k > k_limit:
        raise DimensionTooLargeError(f"nullspace dimension {k} exceeds limit {k_limit}")
    counts = np.zeros(H.cols + 1, dtype=np.int64)
    if k == 0:
        counts[0] = 1
        return ExactSpectrum(counts, 0, H.cols)
    inner, outer = _split_halves(basis, H.cols)
    for value in outer:
        words = inner ^ _pack_words([value], H.cols)
        weights = np.bitwise_count(words).sum(axis=1).astype(np.int64)
        counts += np.bincount(weights, minlength=H.cols + 1)
    return ExactSpectrum(counts, k, H.cols)


def min_weight_in_mask(
    H: SparseBinaryMatrix, mask: int, k_limit: int = DEFAULT_K_LIMIT
) -> int | None:
    """Minimum weight over codewords intersecting the column bitset ``mask``."""
    basis = nullspace_bits(H)
    k = len(basis)
    if k > k_limit:
        raise DimensionTooLargeError(f"nullspace dimension {k} exceeds limit {k_limit}")
    if k == 0:
        return None
    inner, outer = _split_halves(basis, H.cols)
    mask_words = _pack_words([mask], H.cols)
    inner_masked = inner & mask_words
    big = H.cols + 1
    best = big
    for value in outer:
        value_words = _pack_words([value], H.cols)
        words = inner ^ value_words
        hit = ((inner_masked ^ (value_words & mask_words)) != 0).any(axis=1)
        if hit.any():
            weights = np.bitwise_count(words).sum(axis=1).astype(np.int64)
            best = min(best, int(np.where(hit, weights, big).min()))
    return None if best == big else best


@dataclass(frozen=True)
class FreeDistanceWitness:
    """Upper bound on free distance from truncated-window search."""

    d_upper: int
    window_length: int
    per_window: dict[int, int]


def free_distance_upper(
    unwrapping: Unwrapping,
    spec: LiftSpec,
    L_max: int = 4,
    k_limit: int = DEFAULT_K_LIMIT,
) -> FreeDistanceWitness | None:
    """Search zero-state truncations for low-weight unterminated codewords.

    Every codeword of a truncated window with the continuation block-row
    appended extends by zeros to a codeword of the unterminated code, so
    its weight upper-bounds the free distance.  Restricting to supports
    that touch the first block-column loses nothing: the band is
    invariant under shifts by one block-column.
    """
    lower, upper = lift_pair(unwrapping, spec)
    first_block = (1 << lower.cols) - 1
    per_window: dict[int, int] = {}
    best: tuple[int, int] | None = None
    for L in range(2, L_max + 1):
        H = assemble_window(lower, upper, L, continuation=True)
        try:
            w = min_weight_in_mask(H, first_block, k_limit)
        except DimensionTooLargeError:
            break
        if w is not None:
            per_window[L] = w
            if best is None or w < best[0]:
                best = (w, L)
    if best is None:
        return None
    return FreeDistanceWitness(best[0], best[1], per_window)


@dataclass(frozen=True)
class Theorem1Record:
    lam: int
    d_min_tailbiting: int | None
    d_free_upper: int | None
    consistent: bool | None


def theorem1_check(
    unwrapping: Unwrapping,
    spec: LiftSpec,
    lambdas: tuple[int, ...] = (1, 2, 3),
    L_max: int = 4,
    k_limit: int = DEFAULT_K_LIMIT,
) -> list[Theorem1Record]:
    """Exact check that tail-biting minimum distances never exceed the
    free-distance upper bound of the same lifted unterminated code."""
    lower, upper = lift_pair(unwrapping, spec)
    witness = free_distance_upper(unwrapping, spec, L_max, k_limit)
    d_up = witness.d_upper if witness is not None else None
    records = []
    for lam in lambdas:
        spectrum = exact_spectrum(assemble_tailbiting(lower, upper, lam), k_limit)
        d_tb = spectrum.d_min
        ok = None if (d_tb is None or d_up is None) else d_tb <= d_up
        records.append(Theorem1Record(lam, d_tb, d_up, ok))
    return records


def count_even_matrices(N: int, col_weights: tuple[int, ...]) -> int:
    """Number of N-row binary matrices with the given column sums and all
    row sums even.  Exact big-integer dynamic programming over columns;
    state is the number of rows with odd partial sum."""
    if any(w < 0 or w > N for w in col_weights):
        return 0
    state = [0] * (N + 1)
    state[0] = 1
    for d in col_weights:
        new = [0] * (N + 1)
        for odd, ways in enumerate(state):
            if ways == 0:
                continue
            a_lo = max(0, d - (N - odd))
            a_hi = min(odd, d)
            for a in range(a_lo, a_hi + 1):
                b = d - a
                new[odd - a + b] += ways * math.comb(odd, a) * math.comb(N - odd, b)
        state = new
    return state[0]


def check_exponent_exact(N: int, col_weights: tuple[int, ...]) -> float:
    """(1/N) ln of the exact even-overlap count; -inf when the count is 0."""
    count = count_even_matrices(N, col_weights)
    if count == 0:
        return float("-inf")
    return float(_log_bigint(count)) / N


def _log_bigint(value: int) -> float:
    if value.bit_length() <= 900:
        return math.log(value)
    shift = value.bit_length() - 900
    return math.log(value >> shift) + shift * math.log(2.0)


def ensemble_average_spectrum(proto: Protograph, N: int) -> dict[int, Fraction]:
    """Exact expected number of nonzero codewords per transmitted weight,
    averaged over independent uniform edge permutations.

    Only protographs without parallel edges are supported; parallel
    edges in a lifted sample share a disjointness constraint that this
    average does not model.
    """
    if int(proto.base.max()) > 1:
        raise ValueError("exact ensemble average requires a protograph without parallel edges")
    n_c, n_v = proto.n_c, proto.n_v
    transmitted = proto.transmitted
    rows = [tuple(np.flatnonzero(proto.base[c])) for c in range(n_c)]
    even_cache: dict[tuple[int, ...], int] = {}
    out: dict[int, Fraction] = {}
    for dvec in product(range(N + 1), repeat=n_v):
        if not any(dvec):
            continue
        prob = Fraction(1)
        for row in rows:
            key = tuple(sorted(dvec[v] for v in row))
            if key not in even_cache:
                even_cache[key] = count_even_matrices(N, key)
            numer = even_cache[key]
            if numer == 0:
                prob = Fraction(0)
                break
            denom = 1
            for v in row:
                denom *= math.comb(N, dvec[v])
            prob *= Fraction(numer, denom)
        if prob == 0:
            continue
        ways = 1
        for v in range(n_v):
            ways *= math.comb(N, dvec[v])
        d_tx = sum(dvec[v] for v in transmitted)
        out[d_tx] = out.get(d_tx, Fraction(0)) + ways * prob
    return out
