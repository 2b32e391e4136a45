"""Belief-propagation decoding: flooding sum-product and sliding window.

The flooding decoder is fully batched over frames: messages live in
(frames, edges) arrays, per-check aggregation uses segmented reductions
over a check-major edge order, and tanh-domain products are tracked as
log-magnitude, sign, and zero-count so that exact-zero messages stay
exact instead of poisoning a product.

The sliding-window decoder runs the same engine over a window of
consecutive periods of the unterminated band, folds already-emitted
decisions into check parity offsets, retains check-to-variable messages
in the overlap when the window shifts, and emits the oldest period per
shift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lift import LiftSpec, SparseBinaryMatrix, lift_pair
from .unwrap import Unwrapping

_TANH_CAP = 1.0 - 1e-15


@dataclass(frozen=True)
class DecoderConfig:
    """Sum-product decoder settings."""

    max_iterations: int = 100
    llr_clamp: float = 25.0
    window_periods: int = 6
    window_iterations_per_shift: int = 100

    def __post_init__(self) -> None:
        if self.max_iterations < 1 or self.window_iterations_per_shift < 1:
            raise ValueError("iteration budgets must be >= 1")
        if self.llr_clamp <= 0:
            raise ValueError("llr_clamp must be positive")
        if self.window_periods < 2:
            raise ValueError("window_periods must be >= 2")


@dataclass(frozen=True)
class DecodeResult:
    hard_decision: np.ndarray
    converged: bool
    iterations_used: int


class _Graph:
    """Edge layout of a parity-check matrix for segmented message passing."""

    def __init__(self, rows_e: np.ndarray, cols_e: np.ndarray, n_rows: int, n_cols: int):
        order = np.lexsort((cols_e, rows_e))
        self.rows_e = rows_e[order]
        self.cols_e = cols_e[order]
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.n_edges = len(self.rows_e)
        self.order = order
        self.present_rows, self.row_start = np.unique(self.rows_e, return_index=True)
        self.seg_of_edge = np.searchsorted(self.present_rows, self.rows_e)
        self.perm_v = np.lexsort((self.rows_e, self.cols_e))
        cols_sorted = self.cols_e[self.perm_v]
        self.present_cols, self.col_start = np.unique(cols_sorted, return_index=True)

    @classmethod
    def from_matrix(cls, H: SparseBinaryMatrix) -> "_Graph":
        rows_e, cols_e = H.edge_arrays()
        return cls(rows_e, cols_e, H.rows, H.cols)

    def check_sum(self, edge_vals: np.ndarray) -> np.ndarray:
        """Sum per present check; (B, E) -> (B, n_present_rows)."""
        return np.add.reduceat(edge_vals, self.row_start, axis=1)

    def var_sum_full(self, edge_vals: np.ndarray) -> np.ndarray:
        """Sum per variable, zeros at variables without edges; -> (B, n_cols)."""
        sums = np.add.reduceat(edge_vals[:, self.perm_v], self.col_start, axis=1)
        out = np.zeros((edge_vals.shape[0], self.n_cols))
        out[:, self.present_cols] = sums
        return out


def _bp_run(
    graph: _Graph,
    llr: np.ndarray,
    max_iterations: int,
    llr_clamp: float,
    parity_offset: np.ndarray | None = None,
    init_m_cv: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Flooding sum-product on a batch of frames.

    ``parity_offset`` holds one bit per present check, folded into both
    the extrinsic sign and the syndrome test.  ``init_m_cv`` seeds
    check-to-variable messages (window overlap retention).  Returns
    (hard, converged, iterations_used, m_cv).
    """
    B = llr.shape[0]
    E = graph.n_edges
    cols_e = graph.cols_e
    seg = graph.seg_of_edge
    R = len(graph.present_rows)
    if parity_offset is None:
        parity_offset = np.zeros((1, R), dtype=np.int64)
    check_sign = 1.0 - 2.0 * parity_offset

    m_cv = np.zeros((B, E)) if init_m_cv is None else init_m_cv.copy()
    hard_out = np.zeros((B, graph.n_cols), dtype=np.uint8)
    conv_out = np.zeros(B, dtype=bool)
    iter_out = np.full(B, max_iterations, dtype=np.int64)

    def syndrome_ok(hard: np.ndarray) -> np.ndarray:
        par = graph.check_sum(hard[:, cols_e].astype(np.float64))
        par = (par.astype(np.int64) + parity_offset) & 1
        return ~(par.any(axis=1))

    varsum = graph.var_sum_full(m_cv)
    posterior = llr + varsum
    hard = (posterior < 0).astype(np.uint8)
    ok = syndrome_ok(hard)
    hard_out[ok] = hard[ok]
    conv_out[ok] = True
    iter_out[ok] = 0

    active = np.flatnonzero(~ok)
    if active.size == 0 or E == 0:
        return hard_out, conv_out, iter_out, m_cv

    llr_e = llr[:, cols_e]
    m_vc = np.clip(llr_e + varsum[:, cols_e] - m_cv, -llr_clamp, llr_clamp)

    a_m_vc = m_vc[active]
    a_m_cv = m_cv[active]
    a_llr = llr[active]
    a_llr_e = llr_e[active]
    a_sign = check_sign if check_sign.shape[0] == 1 else check_sign[active]
    a_off = parity_offset if parity_offset.shape[0] == 1 else parity_offset[active]

    for it in range(1, max_iterations + 1):
        t = np.tanh(0.5 * a_m_vc)
        mag = np.abs(t)
        zero = mag < 1e-300
        logmag = np.where(zero, 0.0, np.log(np.maximum(mag, 1e-300)))
        neg = (t < 0).astype(np.int64)
        slog = graph.check_sum(logmag)
        zcnt = graph.check_sum(zero.astype(np.float64))
        ncnt = graph.check_sum(neg.astype(np.float64)).astype(np.int64)
        ext_log = slog[:, seg] - logmag
        ext_zero = zcnt[:, seg] - zero
        ext_neg = ncnt[:, seg] - neg
        prod = np.where(ext_zero > 0.5, 0.0, np.exp(ext_log))
        prod *= 1.0 - 2.0 * (ext_neg & 1)
        prod *= a_sign[:, seg] if a_sign.shape[0] > 1 else a_sign[0, seg]
        prod = np.clip(prod, -_TANH_CAP, _TANH_CAP)
        a_m_cv = np.clip(2.0 * np.arctanh(prod), -llr_clamp, llr_clamp)

        varsum = graph.var_sum_full(a_m_cv)
        a_m_vc = np.clip(a_llr_e + varsum[:, cols_e] - a_m_cv, -llr_clamp, llr_clamp)

        posterior = a_llr + varsum
        hard = (posterior < 0).astype(np.uint8)
        par = graph.check_sum(hard[:, cols_e].astype(np.float64)).astype(np.int64)
        par = (par + a_off) & 1
        ok = ~(par.any(axis=1))

        m_cv[active] = a_m_cv
        m_vc[active] = a_m_vc
        done = np.flatnonzero(ok)
        if done.size:
            idx = active[done]
            hard_out[idx] = hard[done]
            conv_out[idx] = True
            iter_out[idx] = it
            keep = np.flatnonzero(~ok)
            active = active[keep]
            if active.size == 0:
                break
            a_m_vc = a_m_vc[keep]
            a_m_cv = a_m_cv[keep]
            a_llr = a_llr[keep]
            a_llr_e = a_llr_e[keep]
            if a_sign.shape[0] > 1:
                a_sign = a_sign[keep]
                a_off = a_off[keep]
    if active.size:
        varsum = graph.var_sum_full(m_cv[active])
        hard_out[active] = ((llr[active] + varsum) < 0).astype(np.uint8)
    return hard_out, conv_out, iter_out, m_cv


def bp_decode(
    H: SparseBinaryMatrix, llr: np.ndarray, config: DecoderConfig | None = None
) -> DecodeResult:
    """Decode one frame of channel LLRs against H."""
    cfg = config or DecoderConfig()
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape != (H.cols,):
        raise ValueError(f"llr must have shape ({H.cols},), got {llr.shape}")
    graph = _Graph.from_matrix(H)
    hard, conv, iters, _ = _bp_run(graph, llr[None, :], cfg.max_iterations, cfg.llr_clamp)
    return DecodeResult(hard[0], bool(conv[0]), int(iters[0]))


def bp_decode_batch(
    H: SparseBinaryMatrix, llr: np.ndarray, config: DecoderConfig | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decode a (frames, n) batch; returns (hard, converged, iterations)."""
    cfg = config or DecoderConfig()
    llr = np.asarray(llr, dtype=np.float64)
    if llr.ndim != 2 or llr.shape[1] != H.cols:
        raise ValueError(f"llr must have shape (frames, {H.cols})")
    graph = _Graph.from_matrix(H)
    hard, conv, iters, _ = _bp_run(graph, llr, cfg.max_iterations, cfg.llr_clamp)
    return hard, conv, iters


@dataclass(frozen=True)
class WindowDecodeResult:
    """Per-period decisions of a sliding-window pass."""

    decisions: np.ndarray
    shift_converged: tuple[bool, ...]
    shift_iterations: tuple[int, ...]


def _band_blocks(
    lower: SparseBinaryMatrix, upper: SparseBinaryMatrix, y: int
) -> dict[tuple[int, int], tuple[np.ndarray, np.ndarray]]:
    """Edges of the band split by (row period mod y, column offset).

    Offset 0 is the current period; negative offsets reach back into
    previous periods.  The band repeats with period y so this table
    describes every row of the unterminated matrix.
    """
    rpp = lower.rows // y
    cpp = lower.cols // y
    blocks: dict[tuple[int, int], tuple[list[int], list[int]]] = {}
    for matrix, base_off in ((lower, 0), (upper, -y)):
        for r, c in matrix.entries():
            i, j = r // rpp, c // cpp
            key = (i, j - i + base_off)
            blocks.setdefault(key, ([], []))[0].append(r - i * rpp)
            blocks[key][1].append(c - j * cpp)
    return {
        key: (np.asarray(rs, dtype=np.int64), np.asarray(cs, dtype=np.int64))
        for key, (rs, cs) in blocks.items()
    }


def sliding_window_decode(
    unwrapping: Unwrapping,
    spec: LiftSpec,
    llr_stream: np.ndarray,
    config: DecoderConfig | None = None,
    tail_biting: bool = False,
) -> WindowDecodeResult:
    """Decode a stream of per-period LLR vectors over the lifted band.

    The window spans ``config.window_periods`` periods.  Checks whose
    edges reach periods already emitted receive the parity of those
    decisions as an offset; check-to-variable messages in the shifted
    overlap are retained.  With ``tail_biting`` the stream is treated as
    one wrapped block: column indices fold modulo the stream length and
    the whole stream must fit in a single window, which reproduces
    flooding decoding of the assembled tail-biting matrix.
    """
    cfg = config or DecoderConfig()
    lower, upper = lift_pair(unwrapping, spec)
    y = unwrapping.y
    rpp = lower.rows // y
    cpp = lower.cols // y
    stream = np.asarray(llr_stream, dtype=np.float64)
    if stream.ndim != 2 or stream.shape[1] != cpp:
        raise ValueError(f"llr_stream must have shape (periods, {cpp})")
    P = stream.shape[0]
    blocks = _band_blocks(lower, upper, y)

    if tail_biting:
        if P != cfg.window_periods:
            raise ValueError("tail-biting mode requires window_periods == stream length")
        return _decode_wrapped(blocks, stream, y, rpp, cpp, cfg)

    W = min(cfg.window_periods, P)
    emitted = np.zeros((P, cpp), dtype=np.uint8)
    store: dict[tuple[int, int], np.ndarray] = {}
    conv_list: list[bool] = []
    iter_list: list[int] = []
    for s in range(P - W + 1):
        rows_parts: list[np.ndarray] = []
        cols_parts: list[np.ndarray] = []
        init_parts: list[np.ndarray] = []
        layout: list[tuple[tuple[int, int], int]] = []
        offset_acc = np.zeros(W * rpp, dtype=np.int64)
        for r in range(W):
            rho = s + r
            for off in range(-(y - 1), 1):
                blk = blocks.get((rho % y, off))
                if blk is None:
                    continue
                col_period = rho + off
                if r + off >= 0:
                    rows_parts.append(blk[0] + r * rpp)
                    cols_parts.append(blk[1] + (r + off) * cpp)
                    prev = store.get((rho, off))
                    init_parts.append(prev if prev is not None else np.zeros(len(blk[0])))
                    layout.append(((rho, off), len(blk[0])))
                elif col_period >= 0:
                    np.add.at(offset_acc, blk[0] + r * rpp, emitted[col_period][blk[1]].astype(np.int64))
        rows_e = np.concatenate(rows_parts)
        cols_e = np.concatenate(cols_parts)
        init_flat = np.concatenate(init_parts)
        graph = _Graph(rows_e, cols_e, W * rpp, W * cpp)
        offsets = (offset_acc & 1)[graph.present_rows][None, :]
        llr_w = stream[s : s + W].reshape(1, -1)
        hard, conv, iters, m_cv = _bp_run(
            graph,
            llr_w,
            cfg.window_iterations_per_shift,
            cfg.llr_clamp,
            offsets,
            init_flat[graph.order][None, :],
        )
        conv_list.append(bool(conv[0]))
        iter_list.append(int(iters[0]))
        inv = np.argsort(graph.order)
        m_flat = m_cv[0][inv]
        pos = 0
        for key, size in layout:
            store[key] = m_flat[pos : pos + size]
            pos += size
        for key in [k for k in store if k[0] < s + 1]:
            del store[key]
        if s < P - W:
            emitted[s] = hard[0, :cpp]
        else:
            emitted[s:] = hard[0].reshape(W, cpp)
    return WindowDecodeResult(emitted, tuple(conv_list), tuple(iter_list))


def _decode_wrapped(
    blocks: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]],
    stream: np.ndarray,
    y: int,
    rpp: int,
    cpp: int,
    cfg: DecoderConfig,
) -> WindowDecodeResult:
    P = stream.shape[0]
    if P % y:
        raise ValueError("tail-biting stream length must be a multiple of the cut period")
    rows_parts, cols_parts = [], []
    for r in range(P):
        for off in range(-(y - 1), 1):
            blk = blocks.get((r % y, off))
            if blk is None:
                continue
            rows_parts.append(blk[0] + r * rpp)
            cols_parts.append(blk[1] + ((r + off) % P) * cpp)
    graph = _Graph(np.concatenate(rows_parts), np.concatenate(cols_parts), P * rpp, P * cpp)
    hard, conv, iters, _ = _bp_run(
        graph, stream.reshape(1, -1), cfg.window_iterations_per_shift, cfg.llr_clamp
    )
    return WindowDecodeResult(
        hard[0].reshape(P, cpp), (bool(conv[0]),), (int(iters[0]),)
    )
