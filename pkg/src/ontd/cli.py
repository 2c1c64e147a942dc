"""Command-line interface: ``ontd synth|decompose|reconstruct|evaluate|info``.

Exit codes: 0 success, 1 usage error, 2 input/format error, 3 numerical
failure, 4 finished but some mode solve hit ``max_iter``.

Settings are resolved as defaults < config file < flags. The config file
is flat ``key = value`` text given by ``--config`` or the ``ONTD_CONFIG``
environment variable.
"""

import argparse
from dataclasses import asdict, dataclass, fields
import datetime
import logging
import os
from pathlib import Path
import sys

import numpy as np

from . import __version__
from .admm import AdmmParams
from .core import reconstruct
from .io import (
    FormatError,
    load_model,
    read_keyvalue,
    read_tensor,
    save_model,
    tensor_path,
    write_keyvalue,
    write_tensor,
)
from .linalg import IndefiniteMatrixError
from .metrics import relative_error, similarity
from .pipeline import decompose
from .recovery import RecoveryError, match_factors
from .synth import SynthSpec, gen_tensor
from .tensor import frob_norm

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC, EXIT_WARN = 0, 1, 2, 3, 4

log = logging.getLogger("ontd")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    theta: float = 0.1
    rho1: float = 1.0
    rho2: float = 1.0
    rho3: float = 1.0
    gamma: float = 1.6
    eps: float = 1e-5
    max_iter: int = 1000
    ranks: tuple = ()
    partial: tuple = ()
    dims: tuple = ()
    seed: int = 0
    noise: float = 0.0
    format: str = "binary"
    parallel_modes: bool = False
    out: str = "."

    def admm_params(self):
        try:
            return AdmmParams(
                theta=self.theta, rho1=self.rho1, rho2=self.rho2, rho3=self.rho3,
                gamma=self.gamma, eps=self.eps, max_iter=self.max_iter,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def items(self):
        return list(asdict(self).items())


def _int_list(text):
    text = str(text).strip()
    if not text:
        return ()
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}") from None


def _bool(text):
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


_CONVERT = {
    "theta": float, "rho1": float, "rho2": float, "rho3": float, "gamma": float,
    "eps": float, "max_iter": int, "ranks": _int_list, "partial": _int_list,
    "dims": _int_list, "seed": int, "noise": float, "format": str,
    "parallel_modes": _bool, "out": str,
}


def resolve_config(args):
    """Merge defaults, config file and command-line flags into a :class:`RunConfig`."""
    values = {}
    cfg_path = getattr(args, "config", None) or os.environ.get("ONTD_CONFIG")
    if cfg_path:
        try:
            file_values = read_keyvalue(cfg_path)
        except OSError as exc:
            raise FormatError(f"cannot read config file: {exc}") from None
        unknown = set(file_values) - set(_CONVERT)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(file_values)
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None and flag is not False:
            values[f.name] = flag
    try:
        converted = {k: _CONVERT[k](v) for k, v in values.items()}
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cfg = RunConfig(**converted)
    if cfg.format not in ("text", "binary"):
        raise UsageError(f"--format must be 'text' or 'binary', got {cfg.format!r}")
    return cfg


def _add_admm_flags(p):
    p.add_argument("--theta", type=float)
    p.add_argument("--rho1", type=float)
    p.add_argument("--rho2", type=float)
    p.add_argument("--rho3", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)


def build_parser():
    parser = _Parser(prog="ontd", description="Orthogonal nonnegative Tucker decomposition")
    parser.add_argument("--version", action="version", version=f"ontd {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key = value settings file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=["text", "binary"])
    common.add_argument("--seed", type=int)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic instance and its truth")
    p.add_argument("--ranks", required=False)
    p.add_argument("--dims", help="tensor dims (default: 4 * ranks)")
    p.add_argument("--noise", type=float)

    p = sub.add_parser("decompose", parents=[common], help="run ONTD on a tensor file")
    p.add_argument("tensor")
    p.add_argument("--ranks")
    p.add_argument("--partial", help="0-based modes with identity factors")
    p.add_argument("--parallel-modes", dest="parallel_modes", action="store_true")
    _add_admm_flags(p)

    p = sub.add_parser("reconstruct", parents=[common], help="model directory -> tensor")
    p.add_argument("model")

    p = sub.add_parser("evaluate", parents=[common], help="compare a model with a ground truth")
    p.add_argument("model")
    p.add_argument("--truth", required=True, help="ground-truth model directory")
    p.add_argument("--tensor", help="original tensor, for the reconstruction error")

    p = sub.add_parser("info", help="print a tensor header")
    p.add_argument("tensor")
    return parser


def _timestamp():
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def cmd_synth(cfg):
    if not cfg.ranks:
        raise UsageError("synth needs --ranks")
    dims = cfg.dims or tuple(4 * J for J in cfg.ranks)
    try:
        spec = SynthSpec(dims=dims, ranks=cfg.ranks, seed=cfg.seed, noise_level=cfg.noise)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    A, truth = gen_tensor(spec)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_tensor(A, tensor_path(out / "A", cfg.format), cfg.format)
    save_model(truth, out / "truth", cfg.format)
    write_keyvalue(out / "synth.txt", [
        ("dims", list(spec.dims)), ("ranks", list(spec.ranks)),
        ("seed", spec.seed), ("noise", spec.noise_level),
    ])
    print(f"wrote {tensor_path(out / 'A', cfg.format)} and {out / 'truth'}")
    return EXIT_OK


def _write_residuals(path, diag):
    lines = ["iteration,r_kx,r_kz,r_km,d_x,d_z,d_m,objective,trace\n"]
    for i in range(diag.iterations):
        r, dr = diag.residuals[i], diag.dual_residuals[i]
        vals = [*r, *dr, diag.objective[i], diag.trace[i]]
        lines.append(f"{i + 1}," + ",".join(format(v, ".17g") for v in vals) + "\n")
    Path(path).write_text("".join(lines))


def cmd_decompose(cfg, tensor_file):
    A = read_tensor(tensor_file)
    if not cfg.ranks:
        raise UsageError("decompose needs --ranks")
    if len(cfg.ranks) != A.ndim:
        raise UsageError(f"{len(cfg.ranks)} ranks given for a {A.ndim}-way tensor")
    for n, (I, J) in enumerate(zip(A.shape, cfg.ranks)):
        if not 1 <= J <= I:
            raise UsageError(f"rank {J} for mode {n} must lie in [1, {I}]")
        if n in cfg.partial and J != I:
            raise UsageError(f"identity mode {n} needs rank {I}")
    if any(not 0 <= n < A.ndim for n in cfg.partial):
        raise UsageError(f"--partial modes must lie in [0, {A.ndim - 1}]")
    if A.min() < 0:
        raise FormatError(f"{tensor_file}: tensor has negative entries")
    params = cfg.admm_params()

    report = decompose(A, cfg.ranks, partial=cfg.partial, params=params,
                       seed=cfg.seed, parallel=cfg.parallel_modes)
    out = Path(cfg.out)
    save_model(report.model, out, cfg.format)
    items = [("timestamp", _timestamp()), ("input", str(tensor_file)),
             ("dims", list(A.shape))]
    items += [(f"config.{k}", v) for k, v in cfg.items() if k not in ("out", "noise", "dims")]
    items += [
        ("relative_error", report.relative_error),
        ("compression_ratio", report.compression_ratio),
        ("space_savings", report.space_savings),
        ("core_clamped", report.clamped),
        ("converged", report.converged),
    ]
    for m in report.modes:
        items.append((f"mode{m.mode}.identity", m.identity))
        if m.identity:
            continue
        items += [
            (f"mode{m.mode}.rank", m.rank),
            (f"mode{m.mode}.converged", m.converged),
            (f"mode{m.mode}.iterations", m.iterations),
            (f"mode{m.mode}.final_residual", m.final_residual),
            (f"mode{m.mode}.asymmetry", m.asymmetry),
            (f"mode{m.mode}.idempotency", m.idempotency),
        ]
        _write_residuals(out / f"residuals_mode{m.mode}.csv", m)
    for i, w in enumerate(report.warnings):
        items.append((f"warning{i}", w))
    write_keyvalue(out / "report.txt", items)
    write_keyvalue(out / "timings.txt", [(k, v) for k, v in report.timings.items()])
    print(f"relative_error = {report.relative_error:.6g}")
    print(f"compression_ratio = {report.compression_ratio:.6g}")
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK if report.converged else EXIT_WARN


def cmd_reconstruct(cfg, model_dir):
    model = load_model(model_dir)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = tensor_path(out / "reconstruction", cfg.format)
    write_tensor(reconstruct(model), path, cfg.format)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_evaluate(cfg, model_dir, truth_dir, tensor_file):
    model, truth = load_model(model_dir), load_model(truth_dir)
    if model.dims != truth.dims:
        raise FormatError(f"model dims {model.dims} differ from truth dims {truth.dims}")
    items = [("timestamp", _timestamp()), ("model", str(model_dir)), ("truth", str(truth_dir))]
    sims = []
    for n, (U, V) in enumerate(zip(truth.factors, model.factors)):
        if U is None or V is None:
            continue
        if U.shape != V.shape:
            items.append((f"mode{n}.match_error", "rank mismatch"))
            continue
        _, err = match_factors(U, V)
        sim = similarity(V.T, U.T)
        sims.append(sim)
        items += [(f"mode{n}.match_error", err), (f"mode{n}.similarity", sim)]
    if sims:
        items.append(("similarity", float(np.mean(sims))))
    if tensor_file:
        A = read_tensor(tensor_file)
        items.append(("relative_error", relative_error(A, reconstruct(model))))
    items.append(("truth_relative_error", relative_error(reconstruct(truth), reconstruct(model))))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_keyvalue(out / "evaluate.txt", items)
    for k, v in items[3:]:
        print(f"{k} = {v}")
    return EXIT_OK


def cmd_info(tensor_file):
    T = read_tensor(tensor_file)
    kind = "binary" if Path(tensor_file).read_bytes()[:4] == b"DTTB" else "text"
    print(f"format: {kind}")
    print(f"order: {T.ndim}")
    print("dims: " + " ".join(str(s) for s in T.shape))
    print(f"min: {T.min():.17g}")
    print(f"max: {T.max():.17g}")
    print(f"frobenius_norm: {frob_norm(T):.17g}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"ontd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return exc.code or EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "info":
            return cmd_info(args.tensor)
        cfg = resolve_config(args)
        if args.command == "synth":
            return cmd_synth(cfg)
        if args.command == "decompose":
            return cmd_decompose(cfg, args.tensor)
        if args.command == "reconstruct":
            return cmd_reconstruct(cfg, args.model)
        return cmd_evaluate(cfg, args.model, args.truth, args.tensor)
    except UsageError as exc:
        print(f"ontd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError) as exc:
        print(f"ontd: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (np.linalg.LinAlgError, RecoveryError, IndefiniteMatrixError, FloatingPointError) as exc:
        print(f"ontd: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
