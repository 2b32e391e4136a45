"""BPSK/AWGN Monte Carlo bit-error-rate measurement.

Transmission model: codeword bits map to +/-1, punctured positions are
not transmitted (their channel LLR is exactly zero and they carry no
energy), and Eb/N0 is referenced to the transmitted rate.  Frames are
decoded in batches; counting covers transmitted positions only.

Determinism: every frame's noise comes from a counter-based generator
keyed by (seed, snr index, frame index), so a frame's channel
realization never depends on batch size or on how SNR points are
distributed over workers, and a fixed frame budget reproduces
identical counts under any batching.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .decode import DecoderConfig, _bp_run, _Graph, sliding_window_decode
from .lift import LiftSpec, SparseBinaryMatrix, assemble_tailbiting, lift, lift_pair
from .protograph import Protograph
from .rng import generator, standard_normal
from .unwrap import Unwrapping, tailbite


def noise_sigma(ebn0_db: float, rate: float) -> float:
    """Noise standard deviation for unit-energy BPSK at the given Eb/N0."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    ebn0 = 10.0 ** (ebn0_db / 10.0)
    return float(np.sqrt(1.0 / (2.0 * rate * ebn0)))


def awgn_llr(
    codeword_bits: np.ndarray,
    ebn0_db: float,
    rate: float,
    seed: int,
    punctured_mask: np.ndarray | None = None,
) -> np.ndarray:
    """Channel LLRs for one BPSK/AWGN transmission of a codeword.

    Punctured positions get LLR exactly 0.  The same (bits, ebn0, rate,
    seed) always produces the same vector.
    """
    bits = np.asarray(codeword_bits, dtype=np.uint8)
    sigma = noise_sigma(ebn0_db, rate)
    rng = generator(seed, "awgn")
    noise = sigma * standard_normal(rng, bits.shape[0])
    y = (1.0 - 2.0 * bits.astype(np.float64)) + noise
    llr = 2.0 * y / (sigma * sigma)
    if punctured_mask is not None:
        llr = np.where(punctured_mask, 0.0, llr)
    return llr


@dataclass(frozen=True)
class StopRule:
    """Stop an SNR point after enough frame errors or frames."""

    min_frame_errors: int = 100
    max_frames: int = 10_000_000


@dataclass(frozen=True)
class SnrPointRecord:
    ebn0_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float

    def to_json(self) -> dict:
        return {
            "ebn0_db": self.ebn0_db,
            "frames": self.frames,
            "bit_errors": self.bit_errors,
            "frame_errors": self.frame_errors,
            "ber": self.ber,
            "fer": self.fer,
        }


@dataclass(frozen=True)
class SimulationRecord:
    """One BER curve with everything needed to reproduce it."""

    code: dict
    decoder: dict
    stop: dict
    seed: int
    points: tuple[SnrPointRecord, ...]
    tool_version: str = __version__

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "decoder": self.decoder,
            "stop": self.stop,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "points": [p.to_json() for p in self.points],
        }

    def to_csv(self) -> str:
        lines = ["ebn0_db,ber,fer,frames,bit_errors,frame_errors"]
        for p in self.points:
            lines.append(
                f"{p.ebn0_db},{p.ber:.6e},{p.fer:.6e},{p.frames},{p.bit_errors},{p.frame_errors}"
            )
        return "\n".join(lines) + "\n"


class BlockCode:
    """A lifted block or tail-biting code prepared for simulation."""

    def __init__(
        self,
        H: SparseBinaryMatrix,
        transmitted_mask: np.ndarray,
        rate: float,
        descriptor: dict,
    ):
        if transmitted_mask.shape != (H.cols,):
            raise ValueError("transmitted mask length must match code length")
        self.H = H
        self.transmitted_mask = transmitted_mask.astype(bool)
        self.rate = float(rate)
        self.descriptor = dict(descriptor)
        self.n_transmitted = int(self.transmitted_mask.sum())


def make_block_code(proto: Protograph, spec: LiftSpec) -> BlockCode:
    """Lift a protograph into a simulatable block code."""
    H = lift(proto, spec)
    mask = np.ones(H.cols, dtype=bool)
    for v in proto.punctured:
        mask[v * spec.N : (v + 1) * spec.N] = False
    k = H.cols - H.rows
    rate = k / mask.sum()
    descriptor = {
        "kind": "block",
        "proto": proto.name,
        "base": [[int(e) for e in row] for row in proto.base],
        "punctured": sorted(proto.punctured),
        "N": spec.N,
        "style": spec.style,
        "lift_seed": spec.seed,
    }
    return BlockCode(H, mask, rate, descriptor)


def make_tailbiting_code(unwrapping: Unwrapping, spec: LiftSpec, lam: int) -> BlockCode:
    """Assemble the lifted tail-biting code H_tb for unwrapping factor lam."""
    lower, upper = lift_pair(unwrapping, spec)
    H = assemble_tailbiting(lower, upper, lam)
    proto_tb = tailbite(unwrapping, lam)
    mask = np.ones(H.cols, dtype=bool)
    for v in proto_tb.punctured:
        mask[v * spec.N : (v + 1) * spec.N] = False
    k = H.cols - H.rows
    rate = k / mask.sum()
    descriptor = {
        "kind": "tail_biting",
        "proto": unwrapping.source.name,
        "lambda": lam,
        "N": spec.N,
        "style": spec.style,
        "lift_seed": spec.seed,
    }
    return BlockCode(H, mask, rate, descriptor)


def _simulate_point(
    code: BlockCode,
    cfg: DecoderConfig,
    ebn0_db: float,
    snr_index: int,
    stop: StopRule,
    seed: int,
    batch: int,
) -> SnrPointRecord:
    """All-zero-codeword Monte Carlo at one SNR point.

    Noise is generated per frame from (seed, snr index, frame index), so
    the batch size cannot change any frame's channel realization.
    """
    graph = _Graph.from_matrix(code.H)
    n = code.H.cols
    tx = code.transmitted_mask
    sigma = noise_sigma(ebn0_db, code.rate)
    scale = 2.0 / (sigma * sigma)
    frames = 0
    bit_errors = 0
    frame_errors = 0
    while frame_errors < stop.min_frame_errors and frames < stop.max_frames:
        size = int(min(batch, stop.max_frames - frames))
        llr = np.empty((size, n))
        for j in range(size):
            rng = generator(seed, "awgn", snr_index, frames + j)
            llr[j] = scale * (1.0 + sigma * standard_normal(rng, n))
        llr[:, ~tx] = 0.0
        hard, _, _, _ = _bp_run(graph, llr, cfg.max_iterations, cfg.llr_clamp)
        err = hard[:, tx].astype(np.int64)
        bit_errors += int(err.sum())
        frame_errors += int((err.any(axis=1)).sum())
        frames += size
    ber = bit_errors / (frames * code.n_transmitted)
    fer = frame_errors / frames
    return SnrPointRecord(ebn0_db, frames, bit_errors, frame_errors, ber, fer)


def ber_curve(
    code: BlockCode,
    ebn0_db_list,
    config: DecoderConfig | None = None,
    stop: StopRule | None = None,
    seed: int = 0,
    batch: int = 128,
    workers: int | None = None,
) -> SimulationRecord:
    """Measure BER/FER over a list of Eb/N0 points.

    Workers parallelize over SNR points only; per-frame seeding makes
    the output independent of the worker count.
    """
    cfg = config or DecoderConfig()
    stop = stop or StopRule()
    points_in = [(float(e), i) for i, e in enumerate(ebn0_db_list)]
    if workers and workers > 1 and len(points_in) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_simulate_point, code, cfg, e, i, stop, seed, batch)
                for e, i in points_in
            ]
            points = tuple(f.result() for f in futures)
    else:
        points = tuple(
            _simulate_point(code, cfg, e, i, stop, seed, batch) for e, i in points_in
        )
    return SimulationRecord(
        code=code.descriptor,
        decoder={
            "max_iterations": cfg.max_iterations,
            "llr_clamp": cfg.llr_clamp,
            "window_periods": cfg.window_periods,
            "window_iterations_per_shift": cfg.window_iterations_per_shift,
        },
        stop={"min_frame_errors": stop.min_frame_errors, "max_frames": stop.max_frames},
        seed=seed,
        points=points,
    )


def random_codeword(H: SparseBinaryMatrix, seed: int, basis: np.ndarray | None = None) -> np.ndarray:
    """Uniform random codeword from the nullspace (for equivalence checks)."""
    from .oracle import nullspace_basis

    if basis is None:
        basis = nullspace_basis(H)
    rng = generator(seed, "codeword")
    if basis.shape[0] == 0:
        return np.zeros(H.cols, dtype=np.uint8)
    coeffs = rng.integers(0, 2, size=basis.shape[0]).astype(np.uint8)
    return (coeffs @ basis % 2).astype(np.uint8)


def ber_confidence_interval(errors: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for an error ratio."""
    if trials == 0:
        return (0.0, 1.0)
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * np.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))
    return (max(0.0, center - half), min(1.0, center + half))


def simulate_stream(
    unwrapping: Unwrapping,
    spec: LiftSpec,
    ebn0_db: float,
    rate: float,
    periods: int,
    config: DecoderConfig | None = None,
    seed: int = 0,
    frames: int = 1,
) -> tuple[int, int]:
    """All-zero stream transmission decoded with the sliding window.

    Returns (bit_errors, bits_counted) over the measured span, which
    excludes one window length at each end of the stream.
    """
    cfg = config or DecoderConfig()
    y = unwrapping.y
    cb = unwrapping.source.n_v // y
    cpp = cb * spec.N
    # puncturing repeats with the cut period: period p carries the base
    # variables of block p mod y
    punct = np.zeros((y, cpp), dtype=bool)
    for v in unwrapping.source.punctured:
        blk, pos = divmod(v, cb)
        punct[blk, pos * spec.N : (pos + 1) * spec.N] = True
    slot = np.arange(periods) % y
    sigma = noise_sigma(ebn0_db, rate)
    scale = 2.0 / (sigma * sigma)
    bit_errors = 0
    counted = 0
    lo = cfg.window_periods
    hi = max(lo, periods - cfg.window_periods)
    for f in range(frames):
        rng = generator(seed, "stream", f)
        noise = standard_normal(rng, periods * cpp).reshape(periods, cpp)
        llr = scale * (1.0 + sigma * noise)
        llr[punct[slot]] = 0.0
        result = sliding_window_decode(unwrapping, spec, llr, cfg)
        span = result.decisions[lo:hi][~punct[slot][lo:hi]]
        bit_errors += int(span.sum())
        counted += span.size
    return bit_errors, counted
