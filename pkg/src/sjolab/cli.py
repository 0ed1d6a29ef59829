"""Command-line front end: ``sjolab <command> [options]``.

Configuration comes from ``--config file.json`` and is overridden by flags.
The thread count for BLAS/FFT backends is read from ``SJOLAB_THREADS``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import decomp, modnorm, pdo, symcalc, windows
from .grid import GridSpec, SampledFunction, lp_norm, random_bandlimited
from .rng import make_rng
from .suites import (SUITES, ConfigError, ExperimentConfig, emit_plots_data, run_suite,
                     write_csv)

__all__ = ["main", "build_parser", "thread_count", "run_suite", "emit_plots_data"]

_FLAG_FIELDS = ("L", "N", "window", "radius", "lattice_step", "freq_step", "p", "tau", "seed",
                "samples", "symbol_L", "symbol_N", "out")


def thread_count() -> int:
    raw = os.environ.get("SJOLAB_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError("SJOLAB_THREADS", f"must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("SJOLAB_THREADS", f"must be a positive integer, got {raw!r}")
    return n


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="JSON experiment configuration")
    g.add_argument("--L", type=float, help="torus period")
    g.add_argument("--N", type=int, help="samples per axis")
    g.add_argument("--window", help="window kind: bump or gaussian")
    g.add_argument("--radius", type=float, help="window radius (bump) or width (gaussian)")
    g.add_argument("--lattice-step", dest="lattice_step", type=float)
    g.add_argument("--freq-step", dest="freq_step", type=float, help="frequency lattice step")
    g.add_argument("--p", nargs="+", help="exponent(s) in [1, inf]")
    g.add_argument("--tau", nargs="+", type=float, help="quantization parameter(s)")
    g.add_argument("--seed", type=int)
    g.add_argument("--samples", type=int, help="random inputs per randomized check")
    g.add_argument("--symbol-L", dest="symbol_L", type=float)
    g.add_argument("--symbol-N", dest="symbol_N", type=int)
    g.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sjolab", description="Modulation-space norms and operator bounds on the torus")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modnorm", aliases=["norm"], help="S_w^p norm of a signal")
    _common(p)
    p.add_argument("--signal", help="signal JSON (random band-limited input if omitted)")
    p.add_argument("--method", default="continuous", choices=("continuous", "discrete"))
    p.add_argument("--sobolev", help="JSON with blocks, t and p; prints the Sobolev norm as well")
    p.add_argument("--csv", help="write the profile U(xi) here")

    p = sub.add_parser("decompose", help="frequency-uniform decomposition of a signal")
    _common(p)
    p.add_argument("--signal")

    p = sub.add_parser("transform", help="apply a chirp T_A to a signal")
    _common(p)
    p.add_argument("--signal")
    p.add_argument("--chirp", required=True, help="JSON matrix A (or {\"A\": ...})")
    p.add_argument("--inverse", action="store_true", help="apply T_{-A}")
    p.add_argument("--output", help="write the transformed signal JSON here")

    p = sub.add_parser("quantize", help="matrix of Op_tau(a)")
    _common(p)
    p.add_argument("--symbol", help="symbol JSON on a phase-space grid (Gaussian projector if omitted)")
    p.add_argument("--output", "--matrix-out", dest="output", required=True, help="binary matrix path")

    p = sub.add_parser("schatten", help="Schatten norm of a stored matrix")
    _common(p)
    p.add_argument("--matrix", required=True)
    p.add_argument("--csv", help="write singular values here")

    p = sub.add_parser("verify", help="run verification suites")
    _common(p)
    p.add_argument("suite", nargs="?", default="all", choices=SUITES + ("all",))
    p.add_argument("--plots", action="store_true", help="also write plot CSVs")

    p = sub.add_parser("report", help="write plot CSVs from a saved report")
    _common(p)
    p.add_argument("--report", required=True)
    return ap


def load_config(args) -> ExperimentConfig:
    d = {}
    if args.config:
        d = ExperimentConfig.load(args.config).to_dict()
    for name in _FLAG_FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            d[name] = v
    if getattr(args, "suite", None):
        d["suite"] = args.suite
    return ExperimentConfig.from_dict(d)


def _signal(args, cfg) -> SampledFunction:
    if getattr(args, "signal", None):
        return SampledFunction.from_json(Path(args.signal).read_text())
    return random_bandlimited(cfg.spec(), make_rng(cfg.seed), band=cfg.N // 8)


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def _p_str(p):
    return "inf" if np.isinf(p) else p


def cmd_modnorm(args, cfg):
    u = _signal(args, cfg)
    chi = cfg.make_window(u.spec)
    lat = windows.Lattice(u.spec, cfg.lattice_step) if args.method == "discrete" else None
    out = {"window": chi.kind, "method": args.method, "norms": []}
    for p in cfg.p:
        r = modnorm.swp_norm(u, chi, p, method=args.method, lattice=lat)
        out["norms"].append({"p": _p_str(p), "value": r.value})
    if args.csv:
        U = (modnorm.profile_continuous(u, chi, cfg.p[0]) if lat is None
             else modnorm.profile_discrete(u, chi, lat, cfg.p[0]))
        write_csv(args.csv, ["xi", "U"], zip(u.spec.freq_axis(0), U))
    if args.sobolev:
        d = json.loads(Path(args.sobolev).read_text())
        s = symcalc.MixedSobolevSpec(d.get("blocks", [list(range(u.spec.dim))]), d["t"], d.get("p", 2))
        out["sobolev"] = {"t": list(s.t), "p": _p_str(s.p), "value": symcalc.sobolev_norm(u, s)}
    _emit(out)
    return 0


def cmd_decompose(args, cfg):
    u = _signal(args, cfg)
    pou = windows.make_pou(u.spec.dual(), windows.Lattice(u.spec.dual(), cfg.freq_step))
    dec = decomp.decompose(u, pou)
    chi = cfg.make_window(u.spec)
    res = float(np.abs(decomp.reconstruct(dec).values - u.values).max())
    rows = []
    for p in cfg.p:
        s = decomp.decomposition_norm(dec, p)
        rows.append({"p": _p_str(p), "band_sum": s, "ratio": s / modnorm.swp_norm(u, chi, p).value})
    _emit({"pieces": len(dec), "reconstruction_residual": res, "norms": rows})
    return 0


def _chirp(path) -> symcalc.ChirpSpec:
    d = json.loads(Path(path).read_text())
    return symcalc.ChirpSpec(d["A"] if isinstance(d, dict) else d)


def cmd_transform(args, cfg):
    u = _signal(args, cfg)
    A = _chirp(args.chirp)
    v = symcalc.chirp_TA(u, -A if args.inverse else A)
    if args.output:
        Path(args.output).write_text(v.to_json())
    _emit({"sgn": A.sgn, "det": A.det, "l2_in": lp_norm(u, 2), "l2_out": lp_norm(v, 2)})
    return 0


def cmd_quantize(args, cfg):
    if args.symbol:
        a = pdo.Symbol2D(SampledFunction.from_json(Path(args.symbol).read_text()), Path(args.symbol).stem)
    else:
        sig = GridSpec((cfg.symbol_L,), (cfg.symbol_N,))
        a = pdo.Symbol2D.from_function(sig, lambda x, xi: 2 * np.exp(-(x ** 2 + xi ** 2)), "gaussian")
    taus = cfg.tau if args.tau is not None else [0.5]
    if len(taus) != 1:
        raise ConfigError("tau", "quantize takes a single tau")
    M = pdo.quantize(a, taus[0])
    pdo.write_matrix(args.output, M)
    _emit({"matrix": str(args.output), "shape": list(M.shape), "tau": M.tau})
    return 0


def cmd_schatten(args, cfg):
    M = pdo.read_matrix(args.matrix)
    reps = [pdo.schatten_norm(M, p) for p in cfg.p]
    sv = reps[0].singular_values
    s2 = pdo.schatten_norm(M, 2, sv).value
    if args.csv:
        write_csv(args.csv, ["index", "sigma"], enumerate(sv))
    _emit({"norms": [{"p": _p_str(r.p), "value": r.value} for r in reps],
           "frobenius_check": abs(s2 - float(np.linalg.norm(M.matrix)))})
    return 0


def cmd_verify(args, cfg):
    rep = run_suite(cfg, args.suite)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"report-{args.suite}.json").write_text(rep.to_json())
    (out / f"timing-{args.suite}.json").write_text(json.dumps({"wall_time": rep.wall_time}))
    if args.plots:
        emit_plots_data(rep, out)
    print(rep.table())
    return 0 if rep.ok else 1


def cmd_report(args, cfg):
    rep = json.loads(Path(args.report).read_text())
    paths = emit_plots_data(rep, cfg.out)
    _emit({"written": [str(p) for p in paths]})
    return 0


_COMMANDS = {"modnorm": cmd_modnorm, "norm": cmd_modnorm, "decompose": cmd_decompose,
             "transform": cmd_transform, "quantize": cmd_quantize, "schatten": cmd_schatten,
             "verify": cmd_verify, "report": cmd_report}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args)
        n = thread_count()
    except ConfigError as e:
        ap.error(f"invalid value for '{e.field}': {e.msg}")
    try:
        with threadpool_limits(limits=n):
            return _COMMANDS[args.command](args, cfg)
    except ConfigError as e:
        ap.error(f"invalid value for '{e.field}': {e.msg}")
    except (OSError, ValueError, MemoryError) as e:
        print(f"sjolab: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
