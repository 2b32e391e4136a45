"""Cutting protographs into convolutional form.

``cut`` splits a base matrix P along its y x y block grid
(y = gcd(n_c, n_v)) into a lower-triangular part P_l and a strictly
upper part P_u.  Repeating (P_l, P_u) down a diagonal band gives the
parity-check matrix of an unterminated convolutional code; wrapping the
band after lambda repetitions gives a tail-biting block code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .protograph import Protograph


class TrivialCutError(ValueError):
    """gcd(n_c, n_v) = 1: no non-trivial block partition exists.

    The caller must first enlarge the protograph with
    :func:`protoldpc.protograph.expand` to obtain a cuttable base matrix.
    """

    def __init__(self, n_c: int, n_v: int):
        super().__init__(
            f"gcd({n_c}, {n_v}) = 1 admits only the trivial cut; "
            f"expand the protograph first (copy-and-permute with M >= 2)"
        )
        self.n_c = n_c
        self.n_v = n_v


@dataclass(frozen=True)
class Unwrapping:
    """A cut protograph: P = lower + upper along the y x y block grid."""

    source: Protograph
    lower: np.ndarray
    upper: np.ndarray
    y: int
    reduced_period: int

    def __post_init__(self) -> None:
        self.lower.flags.writeable = False
        self.upper.flags.writeable = False

    @property
    def n_c(self) -> int:
        return self.lower.shape[0]

    @property
    def n_v(self) -> int:
        return self.lower.shape[1]

    @property
    def nc_per_step(self) -> int:
        return self.n_c // self.y

    @property
    def nv_per_step(self) -> int:
        return self.n_v // self.y

    @property
    def period_T(self) -> int:
        """Protograph-level period of the band (block steps)."""
        return self.y

    @property
    def constraint_length_protograph(self) -> int:
        return self.n_v


@dataclass(frozen=True)
class ConvWindow:
    """A finite window of the convolutional band.

    ``matrix`` holds the first L block-rows of the band (P_l on the
    diagonal, P_u one block-column to the left).  With tail_biting
    termination the top-right block is P_u (the wrap), and the window is
    square in block units.
    """

    matrix: np.ndarray
    L: int
    termination: str

    def __post_init__(self) -> None:
        self.matrix.flags.writeable = False


def cut(proto: Protograph) -> Unwrapping:
    """Partition P into (P_l, P_u) along the gcd block grid.

    Blocks (i, j) with i >= j go to the lower part (diagonal included),
    blocks with i < j to the upper part.  Raises TrivialCutError when
    gcd(n_c, n_v) = 1.
    """
    n_c, n_v = proto.n_c, proto.n_v
    y = math.gcd(n_c, n_v)
    if y < 2:
        raise TrivialCutError(n_c, n_v)
    rb, cb = n_c // y, n_v // y
    lower = np.zeros_like(proto.base)
    upper = np.zeros_like(proto.base)
    for i in range(y):
        for j in range(y):
            block = proto.base[i * rb : (i + 1) * rb, j * cb : (j + 1) * cb]
            target = lower if i >= j else upper
            target[i * rb : (i + 1) * rb, j * cb : (j + 1) * cb] = block
    reduced = _reduced_period(lower, upper, y, rb, cb)
    return Unwrapping(source=proto, lower=lower, upper=upper, y=y, reduced_period=reduced)


def _band_row_pattern(lower: np.ndarray, upper: np.ndarray, y: int, rb: int, cb: int, i: int) -> np.ndarray:
    """Fine blocks seen by band row-block i at column offsets -(y-1)..0."""
    pattern = np.zeros((y, rb, cb), dtype=np.int64)
    for off in range(-(y - 1), 1):
        j = i + off
        if j >= 0:
            pattern[off + y - 1] = lower[i * rb : (i + 1) * rb, j * cb : (j + 1) * cb]
        else:
            pattern[off + y - 1] = upper[i * rb : (i + 1) * rb, (j + y) * cb : (j + y + 1) * cb]
    return pattern


def _reduced_period(lower: np.ndarray, upper: np.ndarray, y: int, rb: int, cb: int) -> int:
    """Smallest divisor y' of y under which the band repeats.

    Reported as a diagnostic only; all derived parameters keep T = y.
    """
    patterns = [_band_row_pattern(lower, upper, y, rb, cb, i) for i in range(y)]
    for yp in range(1, y):
        if y % yp != 0:
            continue
        if all(np.array_equal(patterns[i], patterns[(i + yp) % y]) for i in range(y)):
            return yp
    return y


def tailbite(unwrapping: Unwrapping, lam: int) -> Protograph:
    """Tail-biting base matrix: lambda diagonal copies of P_l with P_u
    wrapped, as a protograph of size (lambda*n_c) x (lambda*n_v).

    lambda = 1 returns the original base P = P_l + P_u.
    """
    if lam < 1:
        raise ValueError("unwrapping factor must be >= 1")
    src = unwrapping.source
    if lam == 1:
        return Protograph(
            name=f"{src.name}_tb1",
            base=unwrapping.lower + unwrapping.upper,
            punctured=src.punctured,
        )
    n_c, n_v = unwrapping.n_c, unwrapping.n_v
    big = np.zeros((lam * n_c, lam * n_v), dtype=np.int64)
    for t in range(lam):
        big[t * n_c : (t + 1) * n_c, t * n_v : (t + 1) * n_v] = unwrapping.lower
        prev = (t - 1) % lam
        big[t * n_c : (t + 1) * n_c, prev * n_v : (prev + 1) * n_v] += unwrapping.upper
    punctured = frozenset(t * n_v + v for t in range(lam) for v in src.punctured)
    return Protograph(name=f"{src.name}_tb{lam}", base=big, punctured=punctured)


def terminate(unwrapping: Unwrapping, k: int) -> Protograph:
    """Terminated convolutional protograph over k band periods.

    The band is entered and left cleanly: k diagonal copies of P_l with
    P_u one block-column to the left, plus a trailing block-row holding
    the final P_u, so every edge of every period is constrained.  Check
    rows with no surviving edges (leading rows of P_u) are dropped.

    Codewords of the tail-biting code supported on k consecutive periods
    (any lambda > k) are exactly the codewords of this protograph, which
    makes its ensemble the right object for localized distance questions.
    Raises ProtographError when the result is not a valid protograph
    (short windows of near-square cuts have too many check rows).
    """
    if k < 1:
        raise ValueError("window length must be >= 1")
    src = unwrapping.source
    n_c, n_v = unwrapping.n_c, unwrapping.n_v
    mat = np.zeros(((k + 1) * n_c, k * n_v), dtype=np.int64)
    for t in range(k):
        mat[t * n_c : (t + 1) * n_c, t * n_v : (t + 1) * n_v] = unwrapping.lower
        mat[(t + 1) * n_c : (t + 2) * n_c, t * n_v : (t + 1) * n_v] += unwrapping.upper
    mat = mat[mat.sum(axis=1) > 0]
    punctured = frozenset(t * n_v + v for t in range(k) for v in src.punctured)
    return Protograph(name=f"{src.name}_term{k}", base=mat, punctured=punctured)


def conv_window(unwrapping: Unwrapping, L: int, termination: str = "unterminated_truncation") -> ConvWindow:
    """First L block-rows of the convolutional band.

    ``unterminated_truncation`` keeps only the band; ``tail_biting`` adds
    the P_u wrap in the top-right block (L >= 2), turning the window into
    the tail-biting matrix with unwrapping factor L.
    """
    if L < 1:
        raise ValueError("window length must be >= 1")
    if termination not in ("unterminated_truncation", "tail_biting"):
        raise ValueError(f"unknown termination {termination!r}")
    n_c, n_v = unwrapping.n_c, unwrapping.n_v
    mat = np.zeros((L * n_c, L * n_v), dtype=np.int64)
    for t in range(L):
        mat[t * n_c : (t + 1) * n_c, t * n_v : (t + 1) * n_v] = unwrapping.lower
        if t > 0:
            mat[t * n_c : (t + 1) * n_c, (t - 1) * n_v : t * n_v] = unwrapping.upper
    if termination == "tail_biting":
        if L == 1:
            mat = unwrapping.lower + unwrapping.upper
        else:
            mat[0:n_c, (L - 1) * n_v : L * n_v] = unwrapping.upper
    return ConvWindow(matrix=mat, L=L, termination=termination)


def derived_params(unwrapping: Unwrapping, N: int, lam: int) -> tuple[int, int, int]:
    """Lifted-code parameters (nu_s, T, m_s) for lift size N and factor lambda.

    nu_s = N*n_v is the decoding constraint length and T = lambda*y the
    period.  The syndrome former memory m_s counts band diagonals, y - 1
    minus any trailing identically-zero diagonals, so that some
    H_{m_s}(t) is nonzero (m_s = 0 for P_u = 0: the band degenerates to a
    repeated block code).
    """
    if N < 1 or lam < 1:
        raise ValueError("N and lambda must be >= 1")
    y, rb, cb = unwrapping.y, unwrapping.nc_per_step, unwrapping.nv_per_step
    patterns = [_band_row_pattern(unwrapping.lower, unwrapping.upper, y, rb, cb, i) for i in range(y)]
    m_s = 0
    for depth in range(y - 1, 0, -1):
        if any(np.any(p[y - 1 - depth]) for p in patterns):
            m_s = depth
            break
    return N * unwrapping.n_v, lam * y, m_s
