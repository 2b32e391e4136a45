"""Command-line interface with reproducible run manifests.

Each subcommand wraps one module operation, writes its result files into
``--out``, and records a ``manifest.json`` holding the command name, the
fully resolved configuration, SHA-256 digests of the inputs, and digests
of every output file.  ``rerun`` re-executes a manifest into a fresh
directory and verifies that the regenerated files are byte-identical.

Exit codes: 0 success, 1 computational failure (non-convergence, output
mismatch on rerun), 2 input error (unreadable or malformed files,
invalid parameter combinations).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .decode import DecoderConfig
from .lift import (
    EntryExceedsLiftError,
    LIFT_STYLES,
    LiftSpec,
    assemble_tailbiting,
    export_alist,
    lift,
    lift_pair,
)
from .oracle import (
    DimensionTooLargeError,
    exact_spectrum,
    free_distance_upper,
    theorem1_check,
)
from .protograph import Protograph, ProtographError, load_protograph, save_protograph
from .sim import StopRule, ber_curve, make_block_code, make_tailbiting_code
from .spectral import (
    STATUS_OK,
    InnerSolverError,
    OptimizerUnreliableError,
    SpectralOptions,
    conv_bound,
    growth_rate,
)
from .unwrap import TrivialCutError, cut, derived_params, tailbite

_INPUT_ERRORS = (
    ProtographError,
    TrivialCutError,
    EntryExceedsLiftError,
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
)
_COMPUTE_ERRORS = (InnerSolverError, OptimizerUnreliableError, DimensionTooLargeError)


class ManifestError(ValueError):
    """A manifest is unreadable, incomplete, or fails input verification."""


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_text(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def _write_json(path: Path, obj) -> Path:
    return _write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_proto(path: str) -> Protograph:
    return load_protograph(Path(path))


def _spectral_options(config: dict) -> SpectralOptions:
    return SpectralOptions(
        normalization=config["normalization"],
        multistarts=config["multistarts"],
        delta_start=config["delta_start"],
        delta_stop=config["delta_max"],
        delta_step=config["delta_step"],
        bisect_tol=config["tol"],
        seed=config["seed"],
    )


def _lift_spec(config: dict) -> LiftSpec:
    return LiftSpec(N=config["n"], style=config["style"], seed=config["lift_seed"])


def _formats(config: dict) -> set[str]:
    choice = config.get("format", "both")
    return {"csv", "structured"} if choice == "both" else {choice}


# ---------------------------------------------------------------------------
# Runners.  Each takes the resolved configuration plus an output directory,
# writes its result files, and returns (written paths, success flag).


def _run_analyze(config: dict, out_dir: Path) -> tuple[list[Path], bool]:
    proto = _load_proto(config["proto"])
    result = growth_rate(proto, _spectral_options(config))
    outputs = []
    if "structured" in _formats(config):
        outputs.append(_write_json(out_dir / "analyze.json", result.to_json()))
    if "csv" in _formats(config):
        rows = ["delta,r"]
        rows += [f"{d},{r}" for d, r in zip(result.curve.deltas, result.curve.r_values)]
        outputs.append(_write_text(out_dir / "analyze.csv", "\n".join(rows) + "\n"))
    status = result.status
    print(f"analyze {proto.name}: status={status} delta_min={result.delta_min}")
    return outputs, status == STATUS_OK


def _run_bound_curve(config: dict, out_dir: Path) -> tuple[list[Path], bool]:
    proto = _load_proto(config["proto"])
    curve = conv_bound(
        proto,
        config["lambda_max"],
        expand_factor=config["expand_m"],
        expand_seed=config["expand_seed"],
        options=_spectral_options(config),
    )
    outputs = []
    if "structured" in _formats(config):
        outputs.append(_write_json(out_dir / "bound_curve.json", curve.to_json()))
    if "csv" in _formats(config):
        rows = ["lambda,bound"]
        rows += [
            f"{lam},{'' if b is None else b}"
            for lam, b in zip(curve.lambdas, curve.bounds)
        ]
        outputs.append(_write_text(out_dir / "bound_curve.csv", "\n".join(rows) + "\n"))
    ok = all(s == STATUS_OK for s in curve.statuses)
    print(
        f"bound_curve {proto.name}: plateau_onset={curve.plateau_onset} "
        f"plateau_value={curve.plateau_value}"
    )
    return outputs, ok


def _run_lift(config: dict, out_dir: Path) -> tuple[list[Path], bool]:
    proto = _load_proto(config["proto"])
    spec = _lift_spec(config)
    H = lift(proto, spec)
    alist_path = _write_text(out_dir / "lifted.alist", export_alist(H))
    summary = {
        "proto_name": proto.name,
        "rows": H.rows,
        "cols": H.cols,
        "nnz": H.nnz,
        "density": H.density(),
        "lift": {"N": spec.N, "style": spec.style, "seed": spec.seed},
        "alist_sha256": _sha256_file(alist_path),
    }
    summary_path = _write_json(out_dir / "lift.json", summary)
    print(f"lift {proto.name}: ({H.rows} x {H.cols}) nnz={H.nnz}")
    return [alist_path, summary_path], True


def _matrix_lines(name: str, matrix: np.ndarray) -> list[str]:
    lines = [f"{name} ="]
    lines += ["  " + " ".join(str(int(v)) for v in row) for row in matrix]
    return lines


def _run_unwrap(config: dict, out_dir: Path) -> tuple[list[Path], bool]:
    proto = _load_proto(config["proto"])
    unwrapping = cut(proto)
    lam = 1 if config["lam"] is None else config["lam"]
    nu_s, period, m_s = derived_params(unwrapping, config["n"], lam)
    doc = {
        "proto_name": proto.name,
        "y": unwrapping.y,
        "reduced_period": unwrapping.reduced_period,
        "lower": [[int(v) for v in row] for row in unwrapping.lower],
        "upper": [[int(v) for v in row] for row in unwrapping.upper],
        "N": config["n"],
        "lambda": lam,
        "nu_s": nu_s,
        "T": period,
        "m_s": m_s,
    }
    outputs = [_write_json(out_dir / "unwrap.json", doc)]
    if config["lam"] is not None:
        tb = tailbite(unwrapping, lam)
        tb_path = out_dir / f"tailbiting_lambda{lam}.json"
        save_protograph(tb, tb_path)
        outputs.append(tb_path)
    lines = _matrix_lines("P_l", unwrapping.lower)
    lines += _matrix_lines("P_u", unwrapping.upper)
    lines.append(f"y = {unwrapping.y}  reduced_period = {unwrapping.reduced_period}")
    lines.append(f"nu_s = {nu_s}  T = {period}  m_s = {m_s}  (N = {config['n']}, lambda = {lam})")
    print("\n".join(lines))
    return outputs, True


def _run_mindist(config: dict, out_dir: Path) -> tuple[list[Path], bool]:
    proto = _load_proto(config["proto"])
    spec = _lift_spec(config)
    lam = config["lam"]
    if lam is None:
        H = lift(proto, spec)
        kind = {"kind": "block"}
    else:
        lower, upper = lift_pair(cut(proto), spec)
        H = assemble_tailbiting(lower, upper, lam)
        kind = {"kind": "tailbiting", "lambda": lam}
    spectrum = exact_spectrum(H, k_limit=config["k_limit"])
    doc = {
        "proto_name": proto.name,
        "code": {
            **kind,
            "N": spec.N,
            "style": spec.style,
            "lift_seed": spec.seed,
            "rows": H.rows,
            "cols": H.cols,
        },
        "dimension": spectrum.dimension,
        "d_min": spectrum.d_min,
        "spectrum": [[int(w), int(c)] for w, c in sorted(spectrum.nonzero().items())],
    }
    if config["free_distance"]:
        witness = free_distance_upper(
            cut(proto), spec, L_max=config["window_max"], k_limit=config["k_limit"]
        )
        doc["free_distance_upper"] = (
            None
            if witness is None
            else {
                "d_upper": witness.d_upper,
                "window_length": witness.window_length,
                "per_window": {str(k): v for k, v in witness.per_window.items()},
            }
        )
    if config["theorem1"]:
        records = theorem1_check(
            cut(proto),
            spec,
            lambdas=tuple(config["theorem1"]),
            L_max=config["window_max"],
            k_limit=config["k_limit"],
        )
        doc["theorem1"] = [
            {
                "lambda": r.lam,
                "d_min_tailbiting": r.d_min_tailbiting,
                "d_free_upper": r.d_free_upper,
                "consistent": r.consistent,
            }
            for r in records
        ]
    outputs = []
    if "structured" in _formats(config):
        outputs.append(_write_json(out_dir / "mindist.json", doc))
    if "csv" in _formats(config):
        rows = ["weight,count"]
        rows += [f"{w},{c}" for w, c in doc["spectrum"]]
        outputs.append(_write_text(out_dir / "mindist.csv", "\n".join(rows) + "\n"))
    print(f"mindist {proto.name}: d_min={spectrum.d_min} dimension={spectrum.dimension}")
    return outputs, True


def _run_simulate(config: dict, out_dir: Path) -> tuple[list[Path], bool]:
    proto = _load_proto(config["proto"])
    spec = _lift_spec(config)
    if config["lam"] is None:
        code = make_block_code(proto, spec)
    else:
        code = make_tailbiting_code(cut(proto), spec, config["lam"])
    decoder = DecoderConfig(
        max_iterations=config["max_iterations"], llr_clamp=config["llr_clamp"]
    )
    stop = StopRule(
        min_frame_errors=config["min_frame_errors"], max_frames=config["max_frames"]
    )
    record = ber_curve(
        code,
        config["ebn0"],
        config=decoder,
        stop=stop,
        seed=config["seed"],
        batch=config["batch"],
        workers=config["workers"],
    )
    outputs = []
    if "structured" in _formats(config):
        outputs.append(_write_json(out_dir / "simulate.json", record.to_json()))
    if "csv" in _formats(config):
        outputs.append(_write_text(out_dir / "simulate.csv", record.to_csv()))
    for point in record.points:
        print(
            f"simulate {proto.name}: ebn0={point.ebn0_db} ber={point.ber:.3e} "
            f"frames={point.frames}"
        )
    return outputs, True


_RUNNERS = {
    "analyze": _run_analyze,
    "bound_curve": _run_bound_curve,
    "lift": _run_lift,
    "unwrap": _run_unwrap,
    "mindist": _run_mindist,
    "simulate": _run_simulate,
}


def _input_paths(config: dict) -> list[str]:
    return [config["proto"]] if "proto" in config else []


def _write_manifest(
    command: str, config: dict, out_dir: Path, outputs: list[Path]
) -> Path:
    manifest = {
        "tool": "protoldpc",
        "tool_version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "command": command,
        "config": config,
        "inputs": {p: _sha256_file(Path(p)) for p in _input_paths(config)},
        "outputs": {p.name: _sha256_file(p) for p in outputs},
    }
    return _write_json(out_dir / "manifest.json", manifest)


def _execute(command: str, config: dict, out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs, ok = _RUNNERS[command](config, out_dir)
    _write_manifest(command, config, out_dir, outputs)
    return 0 if ok else 1


def _run_rerun(args: argparse.Namespace) -> int:
    manifest_path = Path(args.manifest)
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest: {exc}") from exc
    for key in ("command", "config", "inputs", "outputs"):
        if key not in manifest:
            raise ManifestError(f"manifest missing field {key!r}")
    command = manifest["command"]
    if command not in _RUNNERS:
        raise ManifestError(f"unknown command in manifest: {command!r}")
    config = dict(manifest["config"])
    for path, recorded in manifest["inputs"].items():
        actual = _sha256_file(Path(path))
        if actual != recorded:
            raise ManifestError(
                f"input {path} changed since the original run "
                f"(sha256 {actual} != {recorded})"
            )
    if args.workers is not None and "workers" in config:
        config["workers"] = args.workers
    out_dir = Path(args.out) if args.out else manifest_path.parent / "rerun"
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs, _ok = _RUNNERS[command](config, out_dir)
    _write_manifest(command, config, out_dir, outputs)
    produced = {p.name: _sha256_file(p) for p in outputs}
    mismatched = sorted(
        (set(manifest["outputs"]) ^ set(produced))
        | {k for k in produced if manifest["outputs"].get(k) != produced[k]}
    )
    for name in sorted(set(manifest["outputs"]) | set(produced)):
        state = "MISMATCH" if name in mismatched else "ok"
        print(f"rerun {command}: {name} {state}")
    return 1 if mismatched else 0


# ---------------------------------------------------------------------------
# Argument parsing.


def _add_out(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=".", help="output directory (default: .)")


def _add_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        choices=("csv", "structured", "both"),
        default="both",
        help="result file format(s) to emit",
    )


def _add_spectral_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--normalization", choices=("full", "transmitted"), default="full")
    parser.add_argument("--multistarts", type=int, default=32)
    parser.add_argument("--delta-start", type=float, default=1e-3)
    parser.add_argument("--delta-step", type=float, default=1e-3)
    parser.add_argument("--delta-max", type=float, default=0.2, help="end of the delta scan grid")
    parser.add_argument("--tol", type=float, default=2.5e-5, help="bisection tolerance on delta_min")
    parser.add_argument("--seed", type=int, default=0, help="optimizer multistart seed")


def _add_lift_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, required=True, help="lift size N")
    parser.add_argument("--style", choices=LIFT_STYLES, default="random_permutation")
    parser.add_argument("--lift-seed", type=int, default=0, help="permutation draw seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="protoldpc",
        description="Protograph LDPC block, tail-biting, and convolutional code toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="scan r(delta) and locate delta_min")
    p.add_argument("proto", help="protograph JSON file")
    _add_spectral_flags(p)
    _add_format(p)
    _add_out(p)

    p = sub.add_parser(
        "bound-curve",
        aliases=["bound_curve"],
        help="free-distance lower-bound curve lambda * delta_min(lambda)",
    )
    p.add_argument("proto")
    p.add_argument("--lambda-max", type=int, required=True)
    p.add_argument("--expand-m", type=int, default=None, help="graph-cover expansion factor for trivial cuts")
    p.add_argument("--expand-seed", type=int, default=0)
    _add_spectral_flags(p)
    _add_format(p)
    _add_out(p)

    p = sub.add_parser("lift", help="lift a protograph and export the alist matrix")
    p.add_argument("proto")
    _add_lift_flags(p)
    _add_out(p)

    p = sub.add_parser("unwrap", help="cut into (P_l, P_u) and report band parameters")
    p.add_argument("proto")
    p.add_argument("--n", type=int, default=1, help="lift size N for derived parameters")
    p.add_argument("--lambda", dest="lam", type=int, default=None, help="also write the tail-biting base matrix")
    _add_out(p)

    p = sub.add_parser("mindist", help="exact weight spectrum of a small lifted code")
    p.add_argument("proto")
    _add_lift_flags(p)
    p.add_argument("--lambda", dest="lam", type=int, default=None, help="tail-biting factor (default: block code)")
    p.add_argument("--k-limit", type=int, default=28, help="largest nullspace dimension to enumerate")
    p.add_argument("--free-distance", action="store_true", help="include the free-distance upper-bound witness")
    p.add_argument("--theorem1", type=int, nargs="+", default=None, metavar="LAMBDA",
                   help="compare tail-biting d_min against the free-distance bound")
    p.add_argument("--window-max", type=int, default=4, help="longest truncated window searched")
    _add_format(p)
    _add_out(p)

    p = sub.add_parser("simulate", help="Monte Carlo BER/FER over an AWGN channel")
    p.add_argument("proto")
    _add_lift_flags(p)
    p.add_argument("--lambda", dest="lam", type=int, default=None, help="tail-biting factor (default: block code)")
    p.add_argument("--ebn0", type=float, nargs="+", required=True, help="Eb/N0 points in dB")
    p.add_argument("--max-iterations", type=int, default=100)
    p.add_argument("--llr-clamp", type=float, default=25.0)
    p.add_argument("--min-frame-errors", type=int, default=100)
    p.add_argument("--max-frames", type=int, default=10_000_000)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--seed", type=int, default=0, help="noise seed")
    p.add_argument("--workers", type=int, default=None, help="parallel workers over SNR points (default: cores)")
    _add_format(p)
    _add_out(p)

    p = sub.add_parser("rerun", help="re-execute a manifest and verify byte-identical outputs")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="output directory (default: <manifest dir>/rerun)")
    p.add_argument("--workers", type=int, default=None, help="override the recorded worker count")

    return parser


def _config_from_args(args: argparse.Namespace) -> dict:
    config = {
        k: v
        for k, v in vars(args).items()
        if k not in ("command", "out")
    }
    if config.get("workers", "absent") is None:
        config["workers"] = os.cpu_count() or 1
    return config


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command.replace("-", "_")
    try:
        if command == "rerun":
            return _run_rerun(args)
        return _execute(command, _config_from_args(args), Path(args.out))
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _COMPUTE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
