"""Lifting base matrices to explicit sparse GF(2) parity-check matrices.

Each base entry b >= 1 becomes the sum of b pairwise-disjoint N x N
permutation matrices (random or circulant style), each zero entry the
N x N zero block.  Disjointness keeps all N*b ones: overlapping ones
would cancel mod 2 and silently change the degree distribution.

The module also provides band/wrap assembly from a lifted (P_l, P_u)
pair.  Assembly reuses one lifted block per base entry, so tail-biting
matrices of every unwrapping factor and truncated convolutional windows
are wrappings/windows of the same unterminated lifted code - the
pointwise free-distance comparisons in the oracle module rely on this.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .permutations import draw_permutations, draw_shifts
from .protograph import Protograph
from .rng import generator
from .unwrap import Unwrapping

LIFT_STYLES = ("random_permutation", "circulant")


class EntryExceedsLiftError(ValueError):
    """A base entry exceeds the lift size, so disjoint permutations cannot exist."""


@dataclass(frozen=True)
class LiftSpec:
    """Lift size, permutation style and seed."""

    N: int
    style: str = "random_permutation"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError("lift size N must be >= 1")
        if self.style not in LIFT_STYLES:
            raise ValueError(f"style must be one of {LIFT_STYLES}, got {self.style!r}")


class SparseBinaryMatrix:
    """Bit-packed sparse GF(2) matrix.

    Rows are stored as Python int bitsets (bit v set <=> entry (r, v) is
    one), which makes GF(2) row operations and band assembly cheap.  Edge
    arrays for decoder traversal are derived on demand.
    """

    __slots__ = ("rows", "cols", "row_bits")

    def __init__(self, rows: int, cols: int, row_bits: list[int]):
        if len(row_bits) != rows:
            raise ValueError("row_bits length must equal row count")
        mask = (1 << cols) - 1
        for r, bits in enumerate(row_bits):
            if bits < 0 or bits & ~mask:
                raise ValueError(f"row {r} has bits outside [0, {cols})")
        self.rows = rows
        self.cols = cols
        self.row_bits = list(row_bits)

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries) -> "SparseBinaryMatrix":
        bits = [0] * rows
        for r, c in entries:
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError(f"entry ({r}, {c}) out of range")
            if bits[r] >> c & 1:
                raise ValueError(f"duplicate entry ({r}, {c})")
            bits[r] |= 1 << c
        return cls(rows, cols, bits)

    @classmethod
    def from_dense(cls, array) -> "SparseBinaryMatrix":
        arr = np.asarray(array)
        bits = []
        for row in arr:
            acc = 0
            for c in np.flatnonzero(row):
                acc |= 1 << int(c)
            bits.append(acc)
        return cls(arr.shape[0], arr.shape[1], bits)

    @property
    def nnz(self) -> int:
        return sum(bits.bit_count() for bits in self.row_bits)

    def row_weight(self, r: int) -> int:
        return self.row_bits[r].bit_count()

    def col_weight(self, c: int) -> int:
        mask = 1 << c
        return sum(1 for bits in self.row_bits if bits & mask)

    def entries(self):
        """Yield (row, col) positions in row-major order."""
        for r, bits in enumerate(self.row_bits):
            while bits:
                low = bits & -bits
                yield r, low.bit_length() - 1
                bits ^= low

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Row and column index arrays of all ones, row-major."""
        rs, cs = [], []
        for r, c in self.entries():
            rs.append(r)
            cs.append(c)
        return np.asarray(rs, dtype=np.int64), np.asarray(cs, dtype=np.int64)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for r, c in self.entries():
            out[r, c] = 1
        return out

    def density(self) -> float:
        return self.nnz / (self.rows * self.cols)

    def syndrome(self, word_bits: int) -> int:
        """Bitset of unsatisfied checks for a column-bitset word."""
        out = 0
        for r, bits in enumerate(self.row_bits):
            if (bits & word_bits).bit_count() & 1:
                out |= 1 << r
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseBinaryMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self.row_bits == other.row_bits
        )

    def __repr__(self) -> str:
        return f"SparseBinaryMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


def _block_positions(entry: int, N: int, style: str, rng) -> list[tuple[int, int]]:
    """(row, col) positions of one lifted block for a base entry."""
    if entry > N:
        raise EntryExceedsLiftError(
            f"base entry {entry} exceeds lift size {N}; disjoint permutations impossible"
        )
    positions: list[tuple[int, int]] = []
    if style == "random_permutation":
        for perm in draw_permutations(rng, N, entry):
            positions.extend((i, int(perm[i])) for i in range(N))
    else:
        for shift in draw_shifts(rng, N, entry):
            positions.extend((i, (i + shift) % N) for i in range(N))
    return positions


def lift(proto: Protograph, spec: LiftSpec) -> SparseBinaryMatrix:
    """Lift a protograph to its (n_c*N) x (n_v*N) GF(2) parity-check matrix.

    The permutation stream for block (c, v) is a pure function of
    (seed, c, v), so blocks can be generated in any order with identical
    results.
    """
    return _lift_base(proto.base, spec, tag="p")


def lift_pair(unwrapping: Unwrapping, spec: LiftSpec) -> tuple[SparseBinaryMatrix, SparseBinaryMatrix]:
    """Lift the cut pair (P_l, P_u) once, for band and wrap assembly."""
    lower = _lift_base(unwrapping.lower, spec, tag="l")
    upper = _lift_base(unwrapping.upper, spec, tag="u")
    return lower, upper


def _lift_base(base: np.ndarray, spec: LiftSpec, tag: str) -> SparseBinaryMatrix:
    n_c, n_v = base.shape
    N = spec.N
    bits = [0] * (n_c * N)
    for c in range(n_c):
        for v in range(n_v):
            entry = int(base[c, v])
            if entry == 0:
                continue
            rng = generator(spec.seed, "lift", tag, c, v)
            for i, j in _block_positions(entry, N, spec.style, rng):
                bits[c * N + i] |= 1 << (v * N + j)
    return SparseBinaryMatrix(n_c * N, n_v * N, bits)


def assemble_tailbiting(
    lower: SparseBinaryMatrix, upper: SparseBinaryMatrix, lam: int
) -> SparseBinaryMatrix:
    """Lifted tail-biting matrix: lambda diagonal copies of the lifted pair
    with the upper part wrapped to the top-right corner."""
    if lam < 1:
        raise ValueError("unwrapping factor must be >= 1")
    R, C = lower.rows, lower.cols
    if lam == 1:
        return SparseBinaryMatrix(R, C, [lo | up for lo, up in zip(lower.row_bits, upper.row_bits)])
    bits = [0] * (lam * R)
    for t in range(lam):
        prev = (t - 1) % lam
        for r in range(R):
            bits[t * R + r] = (lower.row_bits[r] << (t * C)) | (upper.row_bits[r] << (prev * C))
    return SparseBinaryMatrix(lam * R, lam * C, bits)


def assemble_window(
    lower: SparseBinaryMatrix,
    upper: SparseBinaryMatrix,
    L: int,
    continuation: bool = False,
) -> SparseBinaryMatrix:
    """Lifted truncation of the convolutional band to L block-columns.

    With ``continuation`` an extra block-row holding only the upper part
    is appended, so every codeword of the window extends by zeros to a
    codeword of the unterminated band (zero state at the window end).
    """
    if L < 1:
        raise ValueError("window length must be >= 1")
    R, C = lower.rows, lower.cols
    n_rows = (L + 1) * R if continuation else L * R
    bits = [0] * n_rows
    for t in range(L):
        for r in range(R):
            acc = lower.row_bits[r] << (t * C)
            if t > 0:
                acc |= upper.row_bits[r] << ((t - 1) * C)
            bits[t * R + r] = acc
    if continuation:
        for r in range(R):
            bits[L * R + r] = upper.row_bits[r] << ((L - 1) * C)
    return SparseBinaryMatrix(n_rows, L * C, bits)


def export_alist(H: SparseBinaryMatrix) -> str:
    """Serialize to the alist interchange format (1-based indices).

    Layout: dimensions ``n m``; maximum column/row degrees; per-column
    degrees; per-row degrees; per-column row-index lists; per-row
    column-index lists.  Index lists are unpadded.
    """
    n, m = H.cols, H.rows
    col_lists: list[list[int]] = [[] for _ in range(n)]
    row_lists: list[list[int]] = [[] for _ in range(m)]
    for r, c in H.entries():
        col_lists[c].append(r + 1)
        row_lists[r].append(c + 1)
    lines = [
        f"{n} {m}",
        f"{max((len(x) for x in col_lists), default=0)} "
        f"{max((len(x) for x in row_lists), default=0)}",
        " ".join(str(len(x)) for x in col_lists),
        " ".join(str(len(x)) for x in row_lists),
    ]
    lines.extend(" ".join(str(i) for i in lst) for lst in col_lists)
    lines.extend(" ".join(str(i) for i in lst) for lst in row_lists)
    return "\n".join(lines) + "\n"


def import_alist(text: str) -> SparseBinaryMatrix:
    """Parse an alist document; zero-padded index lists are accepted."""
    rows_of_ints = [[int(tok) for tok in line.split()] for line in text.splitlines() if line.strip()]
    if len(rows_of_ints) < 4 or len(rows_of_ints[0]) != 2:
        raise ValueError("malformed alist: missing header")
    n, m = rows_of_ints[0]
    if len(rows_of_ints) != 4 + n + m:
        raise ValueError(f"malformed alist: expected {4 + n + m} lines, got {len(rows_of_ints)}")
    col_deg = rows_of_ints[2]
    row_deg = rows_of_ints[3]
    if len(col_deg) != n or len(row_deg) != m:
        raise ValueError("malformed alist: degree list lengths do not match dimensions")
    entries = []
    for c in range(n):
        idx = [i for i in rows_of_ints[4 + c] if i != 0]
        if len(idx) != col_deg[c]:
            raise ValueError(f"malformed alist: column {c} degree mismatch")
        entries.extend((i - 1, c) for i in idx)
    H = SparseBinaryMatrix.from_entries(m, n, entries)
    from_rows: list[set[int]] = [set() for _ in range(m)]
    for r, c in H.entries():
        from_rows[r].add(c + 1)
    for r in range(m):
        idx = {i for i in rows_of_ints[4 + n + r] if i != 0}
        if idx != from_rows[r]:
            raise ValueError(f"malformed alist: row {r} index list inconsistent")
    return H
