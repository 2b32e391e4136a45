"""Protograph data model: loading, validation, degrees, rates, expansion.

A protograph is a small Tanner graph stored as an integer base matrix:
entry ``base[c][v]`` counts the parallel edges between check node c and
variable node v.  Punctured variable nodes stay in the graph as code
constraints but are never transmitted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .permutations import draw_permutations
from .rng import generator


class ProtographError(ValueError):
    """Malformed document or violated protograph invariant."""


@dataclass(eq=False)
class Protograph:
    """Integer base matrix with a puncture mask.

    Immutable by convention: the base array is marked read-only and all
    operations return new instances.
    """

    name: str
    base: np.ndarray
    punctured: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        self.base = np.ascontiguousarray(np.asarray(self.base, dtype=np.int64))
        self.punctured = frozenset(int(v) for v in self.punctured)
        _validate(self.name, self.base, self.punctured)
        self.base.flags.writeable = False

    @property
    def n_c(self) -> int:
        return self.base.shape[0]

    @property
    def n_v(self) -> int:
        return self.base.shape[1]

    @property
    def transmitted(self) -> tuple[int, ...]:
        """Indices of transmitted (non-punctured) variable nodes."""
        return tuple(v for v in range(self.n_v) if v not in self.punctured)

    @property
    def m(self) -> int:
        """Number of transmitted variable nodes."""
        return self.n_v - len(self.punctured)

    @property
    def edge_count(self) -> int:
        return int(self.base.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Protograph):
            return NotImplemented
        return (
            self.name == other.name
            and self.base.shape == other.base.shape
            and bool(np.array_equal(self.base, other.base))
            and self.punctured == other.punctured
        )

    def __repr__(self) -> str:
        return (
            f"Protograph(name={self.name!r}, n_c={self.n_c}, n_v={self.n_v}, "
            f"punctured={sorted(self.punctured)})"
        )

    def to_json(self) -> dict:
        doc: dict = {"name": self.name, "base": self.base.tolist()}
        if self.punctured:
            doc["punctured"] = sorted(self.punctured)
        return doc


@dataclass(frozen=True)
class DegreeProfile:
    """Variable/check degree lists plus the (J, K) pair when regular."""

    variable_degrees: tuple[int, ...]
    check_degrees: tuple[int, ...]
    regular_JK: tuple[int, int] | None

    @property
    def edge_count(self) -> int:
        return sum(self.variable_degrees)


def _validate(name: str, base: np.ndarray, punctured: frozenset[int]) -> None:
    if not isinstance(name, str) or not name:
        raise ProtographError("protograph name must be a non-empty string")
    if base.ndim != 2:
        raise ProtographError("base must be a 2-D integer matrix")
    n_c, n_v = base.shape
    if n_c < 1 or n_v < 1:
        raise ProtographError("base must have at least one row and one column")
    if n_c >= n_v:
        raise ProtographError(
            f"need n_c < n_v for a code with positive rate, got {n_c}x{n_v}"
        )
    if np.any(base < 0):
        c, v = np.argwhere(base < 0)[0]
        raise ProtographError(f"negative entry at row {c}, column {v}")
    row_sums = base.sum(axis=1)
    if np.any(row_sums < 1):
        c = int(np.argmin(row_sums))
        raise ProtographError(f"row {c} has zero weight (isolated check node)")
    col_sums = base.sum(axis=0)
    if np.any(col_sums < 1):
        v = int(np.argmin(col_sums))
        raise ProtographError(f"column {v} has zero weight (isolated variable node)")
    for v in punctured:
        if not 0 <= v < n_v:
            raise ProtographError(f"punctured index {v} out of range [0, {n_v})")
    if n_v - len(punctured) < 1:
        raise ProtographError("at least one variable node must be transmitted")


def load_protograph(source: str | Path | dict) -> Protograph:
    """Load a protograph from a JSON document, file path, or parsed dict.

    The document is an object with fields ``name`` (string), ``base``
    (array of rows of nonnegative integers) and optional ``punctured``
    (0-based variable indices).  Unknown fields (e.g. transcription
    metadata) are ignored.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = None
        if isinstance(source, Path) or (
            isinstance(source, str) and not source.lstrip().startswith("{")
        ):
            try:
                text = Path(source).read_text()
            except OSError as exc:
                raise ProtographError(f"cannot read protograph file: {exc}") from exc
        else:
            text = source
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ProtographError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ProtographError("top-level JSON value must be an object")
    for key in ("name", "base"):
        if key not in doc:
            raise ProtographError(f"missing required field {key!r}")
    base = doc["base"]
    if not isinstance(base, list) or not base or not all(isinstance(r, list) for r in base):
        raise ProtographError("base must be a non-empty array of rows")
    widths = {len(r) for r in base}
    if len(widths) != 1:
        raise ProtographError("base rows have inconsistent lengths")
    for c, row in enumerate(base):
        for v, entry in enumerate(row):
            if not isinstance(entry, int) or isinstance(entry, bool):
                raise ProtographError(f"non-integer entry at row {c}, column {v}")
    punctured = doc.get("punctured", [])
    if not isinstance(punctured, list):
        raise ProtographError("punctured must be an array of integers")
    return Protograph(name=doc["name"], base=np.array(base), punctured=frozenset(punctured))


def save_protograph(proto: Protograph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(proto.to_json(), indent=2, sort_keys=True) + "\n")


def degree_profile(proto: Protograph) -> DegreeProfile:
    """Column and row degree lists, with (J, K) when both are constant."""
    var_deg = tuple(int(d) for d in proto.base.sum(axis=0))
    chk_deg = tuple(int(d) for d in proto.base.sum(axis=1))
    regular = None
    if len(set(var_deg)) == 1 and len(set(chk_deg)) == 1:
        regular = (var_deg[0], chk_deg[0])
    return DegreeProfile(var_deg, chk_deg, regular)


def rates(proto: Protograph) -> tuple[Fraction, Fraction]:
    """Design rate (n_v - n_c)/n_v and transmitted rate (n_v - n_c)/m."""
    k = proto.n_v - proto.n_c
    return Fraction(k, proto.n_v), Fraction(k, proto.m)


def expand(proto: Protograph, M: int, seed: int) -> Protograph:
    """M-fold copy-and-permute expansion of a protograph.

    Each entry r becomes the sum of r seeded M x M permutation matrices
    (pairwise disjoint whenever r <= M), giving an M*n_c x M*n_v base
    matrix whose per-copy degrees match the source.  Nodes are ordered
    copy-major: copy j of check c is row j*n_c + c and copy j of
    variable v is column j*n_v + v, punctured iff v is.  Keeping each
    copy contiguous aligns the gcd block grid of the expansion with copy
    boundaries, which is what makes cutting an expanded protograph
    meaningful.
    """
    if M < 1:
        raise ValueError("expansion factor M must be >= 1")
    if M == 1:
        return proto
    n_c, n_v = proto.n_c, proto.n_v
    big = np.zeros((M * n_c, M * n_v), dtype=np.int64)
    copies = np.arange(M)
    for c in range(n_c):
        for v in range(n_v):
            r = int(proto.base[c, v])
            if r == 0:
                continue
            rng = generator(seed, "expand", M, c, v)
            for perm in draw_permutations(rng, M, r):
                big[copies * n_c + c, perm * n_v + v] += 1
    punctured = frozenset(j * n_v + v for v in proto.punctured for j in range(M))
    return Protograph(name=f"{proto.name}_x{M}s{seed}", base=big, punctured=punctured)
