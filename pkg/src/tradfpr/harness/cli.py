"""Command-line entry point: ``tradfpr {simulate,reconstruct,evaluate,bench,sweep}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from ..solvers import MODES
from . import bench


def _snr(value):
    return None if value.lower() in ("none", "noiseless", "inf") else float(value)


def _common(p):
    p.add_argument("--config", help="JSON config with 'defaults' and 'experiment' blocks")
    p.add_argument("--seed", type=int, help="(base) seed")
    p.add_argument("--iters", type=int, help="outer iterations K")
    p.add_argument("--out", help="output directory (or file stem for simulate)")
    p.add_argument("--threads", type=int, default=1, help="BLAS threads (default 1)")
    p.add_argument("--fast", action="store_true",
                   help="leave BLAS threading alone; results may not be bit-reproducible")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="tradfpr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write Fourier magnitudes of an image")
    p.add_argument("--image", required=True, help="PGM path or phantom:<name>:<size>")
    p.add_argument("--ratio", type=float, default=2.0)
    p.add_argument("--snr", type=_snr, default=None, help="SNR in dB, or 'noiseless'")
    _common(p)

    p = sub.add_parser("reconstruct", help="run a solver on a stored measurement")
    p.add_argument("measurement", help="measurement stem (.f64 + .json)")
    p.add_argument("--mode", default="accelerated", choices=MODES + bench.BASELINE_MODES)
    p.add_argument("--truth", help="ground truth for the trace PSNR column")
    p.add_argument("--align", action="store_true", help="align before trace PSNR")
    _common(p)

    p = sub.add_parser("evaluate", help="score a reconstruction against ground truth")
    p.add_argument("candidate", help="recon .npy or PGM")
    p.add_argument("--image", required=True, help="ground truth PGM or phantom spec")
    p.add_argument("--align", action="store_true")

    for name, text in (("bench", "run an experiment grid"), ("sweep", "kappa3 / lambda sweep")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--image", action="append", help="repeatable")
        p.add_argument("--ratio", type=float, action="append", help="repeatable")
        p.add_argument("--snr", type=_snr, action="append", help="repeatable")
        p.add_argument("--mode", action="append", choices=MODES + bench.BASELINE_MODES)
        p.add_argument("--repeats", type=int)
        p.add_argument("--align", action="store_true")
        if name == "sweep":
            p.add_argument("--kappa3", type=int, action="append", required=True)
            p.add_argument("--lam", type=float, action="append", required=True)
        _common(p)
    return parser


def _load(args):
    cfg = bench.load_config(args.config) if getattr(args, "config", None) else {}
    defaults = dict(cfg.get("defaults", {}))
    if getattr(args, "iters", None) is not None:
        defaults["K"] = args.iters
    return defaults, dict(cfg.get("experiment", {}))


def _spec(args, defaults, exp):
    for key, attr in (("images", "image"), ("ratios", "ratio"), ("snrs", "snr"),
                      ("modes", "mode"), ("repeats", "repeats"), ("seed", "seed"),
                      ("out", "out")):
        value = getattr(args, attr, None)
        if value is not None:
            exp[key] = value
    if args.align:
        exp["align"] = True
    exp["threads"] = None if args.fast else args.threads
    if not exp.get("images"):
        raise SystemExit("no images given (use --image or the config's experiment.images)")
    return bench.ExperimentSpec(overrides=defaults, **exp)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")

    if args.command == "evaluate":
        print(json.dumps(bench.run_evaluate(args.candidate, args.image, args.align), indent=2))
        return 0

    defaults, exp = _load(args)
    seed = args.seed if args.seed is not None else exp.get("seed", 0)

    if args.command == "simulate":
        out = args.out or "measurement"
        _, meta = bench.run_simulate(args.image, args.ratio, args.snr, seed, out)
        print(json.dumps(meta, indent=2))
        return 0

    if args.command == "reconstruct":
        cfg = bench.config_from_dict(defaults, mode=args.mode, seed=seed,
                                     trace_align=args.align)
        spec = bench.ExperimentSpec(images=[], modes=[args.mode], overrides=defaults,
                                    **{k: v for k, v in exp.items()
                                       if k.startswith("hio_")})
        out = args.out or "recon"
        bench.run_reconstruct(args.measurement, cfg, out, args.truth, spec,
                              None if args.fast else args.threads)
        print(os.path.join(out, "recon.pgm"))
        return 0

    spec = _spec(args, defaults, exp)
    if args.command == "bench":
        rows, means, _ = bench.run_bench(spec)
    else:
        rows, means, _ = bench.run_sweep(spec, args.kappa3, args.lam)
    for m in means:
        print(f"{m.image:24s} {m.mode:28s} r={m.r:<4} snr={bench._fmt(m.snr):9s} "
              f"psnr={m.psnr:6.2f} aligned={m.psnr_aligned:6.2f} ssim={m.ssim:.3f} "
              f"time={m.time_s:.1f}s [{m.status}]")
    failed = [r for r in rows if r.status != "ok"]
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
