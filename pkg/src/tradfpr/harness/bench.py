"""Experiment grids: simulate, reconstruct, evaluate, bench and parameter sweeps.

Images are PGM paths or ``phantom:<name>:<size>`` specs. Every run's seed
is derived from the base seed and the cell coordinates, so any result row
can be replayed on its own.

``results.csv`` holds only deterministic columns and is byte-identical
across repeated runs of the same spec; wall-clock times go to
``timings.csv``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import time
import traceback
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .. import baselines
from ..forward import plan_from_ratio, simulate
from ..metrics import align, psnr, ssim
from ..solvers import MODES, SolverConfig, SolverTrace, solve, thread_limit
from . import io
from .phantoms import make_phantom

log = logging.getLogger(__name__)

BASELINE_MODES = ("hio", "gs")

# JSON "defaults" keys -> SolverConfig fields
CONFIG_KEYS = {
    "rho": "rho", "epsilon": "epsilon", "alpha": "alpha", "K": "iters",
    "iters": "iters", "gamma0": "gamma0", "beta": "beta", "kappa1": "kappa1",
    "l0": "l0", "zeta": "zeta", "kappa2": "kappa2", "kappa3": "kappa3",
    "lambda": "lam", "lam": "lam", "tv_mode": "tv_mode", "channels": "channels",
    "mu_floor": "mu_floor", "trace_align": "trace_align",
}

RESULT_COLUMNS = ["image", "mode", "r", "snr", "repeat", "seed", "K",
                  "psnr", "psnr_aligned", "ssim", "status"]
TIMING_COLUMNS = ["image", "mode", "r", "snr", "repeat", "seed", "time_s"]
PLOT_COLUMNS = ["run", "k", "psnr", "fidelity", "tv", "mu", "gamma", "l", "time_ms"]


@dataclass
class ExperimentSpec:
    images: list
    ratios: list = field(default_factory=lambda: [2.0])
    snrs: list = field(default_factory=lambda: [None])
    modes: list = field(default_factory=lambda: ["accelerated"])
    repeats: int = 5
    seed: int = 0
    overrides: dict = field(default_factory=dict)
    out: str = "results"
    align: bool = False
    hio_iters: int = 1000
    hio_beta: float = 0.9
    hio_starts: int = 3
    threads: Optional[int] = 1

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if any(r < 1 for r in self.ratios):
            raise ValueError("sampling ratios must be >= 1")
        for m in self.modes:
            if m not in MODES + BASELINE_MODES:
                raise ValueError(f"unknown mode {m!r}")

    def solver_config(self, **kw) -> SolverConfig:
        return config_from_dict(self.overrides, **kw)


@dataclass
class ResultRow:
    image: str
    mode: str
    r: float
    snr: Optional[float]
    repeat: object
    seed: object
    K: int
    psnr: float = float("nan")
    psnr_aligned: float = float("nan")
    ssim: float = float("nan")
    time_s: float = float("nan")
    status: str = "ok"


def config_from_dict(d: dict, **kw) -> SolverConfig:
    """Build a :class:`SolverConfig` from a ``defaults`` block plus keyword overrides."""
    args = {}
    for key, value in (d or {}).items():
        if key not in CONFIG_KEYS:
            raise ValueError(f"unknown solver parameter {key!r}")
        args[CONFIG_KEYS[key]] = value
    args.update(kw)
    if isinstance(args.get("alpha"), str):
        num, _, den = args["alpha"].partition("/")
        args["alpha"] = float(num) / float(den or 1)
    return SolverConfig(**args)


def derive_seed(base: int, image: str, mode: str, r: float, snr, repeat: int) -> int:
    """Stable 63-bit seed from sha256 over the cell coordinates."""
    key = json.dumps([int(base), image, mode, float(r), None if snr is None else float(snr),
                      int(repeat)])
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "little") >> 1


def image_id(spec: str) -> str:
    if spec.startswith("phantom:"):
        return spec.replace(":", "-")
    return os.path.splitext(os.path.basename(spec))[0]


def resolve_image(spec: str) -> np.ndarray:
    if spec.startswith("phantom:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"phantom spec must be phantom:<name>:<size>, got {spec!r}")
        return make_phantom(parts[1], int(parts[2]))
    return io.load_image(spec)


def _fmt(v):
    if v is None:
        return "noiseless"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(round(v, 10))
    return str(v)


def reconstruct(b, plan, mode, cfg: SolverConfig, spec: ExperimentSpec, seed, truth=None):
    """Run one solver (or baseline) and return ``(x, trace or None)``."""
    if mode in MODES:
        return solve(b, plan, replace(cfg, mode=mode, seed=seed), truth)
    starts = np.random.SeedSequence(seed).generate_state(spec.hio_starts)
    best = None
    for s in starts:
        if mode == "hio":
            x = baselines.hio(b, plan, spec.hio_iters, spec.hio_beta, int(s))
        else:
            x = baselines.gs(b, plan, spec.hio_iters, int(s))
        # pick the start that best explains the data; ground truth is never consulted
        err = baselines.magnitude_error(np.pad(x, ((0, plan.m1 - plan.n1), (0, plan.m2 - plan.n2))), b)
        if best is None or err < best[0]:
            best = (err, x)
    return best[1], None


def score(x, truth):
    return {
        "psnr": psnr(x, truth),
        "psnr_aligned": psnr(align(x, truth).aligned, truth),
        "ssim": ssim(x, truth) if min(truth.shape) >= 11 else float("nan"),
    }


def run_bench(spec: ExperimentSpec):
    """Run the full grid; returns ``(rows, mean_rows, traces)`` and writes files under ``spec.out``."""
    os.makedirs(os.path.join(spec.out, "traces"), exist_ok=True)
    base_cfg = spec.solver_config()
    rows, traces = [], {}
    with thread_limit(spec.threads):
        for img_spec in spec.images:
            iid = image_id(img_spec)
            truth = resolve_image(img_spec)
            for r in spec.ratios:
                plan = plan_from_ratio(*truth.shape, r)
                for snr in spec.snrs:
                    for rep in range(spec.repeats):
                        noise_seed = derive_seed(spec.seed, iid, "noise", r, snr, rep)
                        b, _ = simulate(truth, plan, snr, noise_seed)
                        for mode in spec.modes:
                            seed = derive_seed(spec.seed, iid, mode, r, snr, rep)
                            K = base_cfg.iters if mode in MODES else spec.hio_iters
                            row = ResultRow(iid, mode, float(r), snr, rep, seed, K)
                            t0 = time.perf_counter()
                            try:
                                x, trace = reconstruct(b, plan, mode, base_cfg, spec, seed, truth)
                                row.time_s = time.perf_counter() - t0
                                for k, v in score(x, truth).items():
                                    setattr(row, k, v)
                                if trace is not None:
                                    name = f"{iid}_{mode}_r{r}_{_fmt(snr)}_rep{rep}"
                                    trace.write_jsonl(os.path.join(spec.out, "traces", name + ".jsonl"))
                                    traces[name] = trace
                            except Exception as exc:  # recorded per row; the grid keeps going
                                row.time_s = time.perf_counter() - t0
                                row.status = f"error: {type(exc).__name__}: {exc}"
                                log.error("run %s/%s r=%s snr=%s rep=%d failed\n%s",
                                          iid, mode, r, snr, rep, traceback.format_exc())
                            log.info("%s %s r=%s snr=%s rep=%d psnr=%.2f aligned=%.2f (%.1fs)",
                                     iid, mode, r, _fmt(snr), rep, row.psnr, row.psnr_aligned, row.time_s)
                            rows.append(row)
    rows.sort(key=_row_key)
    means = mean_rows(rows)
    write_results(os.path.join(spec.out, "results.csv"), rows, means)
    write_timings(os.path.join(spec.out, "timings.csv"), rows, means)
    if traces:
        emit_plotdata(traces, os.path.join(spec.out, "plotdata.csv"))
    return rows, means, traces


def _row_key(row):
    return (row.image, row.mode, row.r, -1.0 if row.snr is None else row.snr, row.repeat)


def mean_rows(rows):
    """One row per (image, mode, r, snr) cell with the arithmetic means of its runs."""
    groups = {}
    for row in rows:
        groups.setdefault((row.image, row.mode, row.r, row.snr), []).append(row)
    out = []
    for (iid, mode, r, snr), members in groups.items():
        ok = [m for m in members if m.status == "ok"]
        mean = ResultRow(iid, mode, r, snr, "mean", "", members[0].K)
        if ok:
            for name in ("psnr", "psnr_aligned", "ssim", "time_s"):
                setattr(mean, name, float(np.mean([getattr(m, name) for m in ok])))
        mean.status = f"{len(ok)}/{len(members)} ok"
        out.append(mean)
    out.sort(key=lambda m: (m.image, m.mode, m.r, -1.0 if m.snr is None else m.snr))
    return out


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(getattr(row, c)) for c in columns])


def write_results(path, rows, means):
    _write_csv(path, RESULT_COLUMNS, list(rows) + list(means))


def write_timings(path, rows, means):
    _write_csv(path, TIMING_COLUMNS, list(rows) + list(means))


def read_results(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def emit_plotdata(traces, path):
    """Long-format CSV of trace records, one line per (run, k)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PLOT_COLUMNS)
        for run in sorted(traces):
            tr = traces[run]
            records = tr.records if isinstance(tr, SolverTrace) else tr
            for rec in records:
                w.writerow([run] + ["" if rec.get(c) is None else rec[c] for c in PLOT_COLUMNS[1:]])


def run_simulate(image, ratio, snr, seed, out_stem):
    """Measure one image and write the raw measurement with its sidecar."""
    truth = resolve_image(image)
    plan = plan_from_ratio(*truth.shape, ratio)
    b, noise = simulate(truth, plan, snr, seed)
    meta = {"image": image, "n1": plan.n1, "n2": plan.n2, "r": plan.ratio,
            "snr": noise.snr_db, "sigma": noise.sigma, "seed": seed}
    io.save_measurement(out_stem, b, meta)
    return b, meta


def run_reconstruct(measurement, cfg: SolverConfig, out_dir, truth_image=None,
                    spec: Optional[ExperimentSpec] = None, threads=1):
    """Reconstruct from a stored measurement; writes ``recon.pgm`` and ``trace.jsonl``."""
    b, meta = io.load_measurement(measurement)
    plan = plan_from_ratio(meta["n1"], meta["n2"], meta["r"])
    if plan.shape != b.shape:
        raise ValueError(f"sidecar ratio {meta['r']} implies {plan.shape}, data is {b.shape}")
    truth = resolve_image(truth_image) if truth_image else None
    spec = spec or ExperimentSpec(images=[], modes=[cfg.mode])
    os.makedirs(out_dir, exist_ok=True)
    with thread_limit(threads):
        x, trace = reconstruct(b, plan, cfg.mode, cfg, spec, cfg.seed, truth)
    io.save_image(x, os.path.join(out_dir, "recon.pgm"))
    np.save(os.path.join(out_dir, "recon.npy"), x)
    if trace is not None:
        trace.write_jsonl(os.path.join(out_dir, "trace.jsonl"))
    return x, trace


def run_evaluate(candidate, truth, use_align=False) -> dict:
    """Metrics of a reconstruction (``.npy`` or PGM) against a ground truth image."""
    x = np.load(candidate) if str(candidate).endswith(".npy") else io.load_image(candidate)
    t = resolve_image(truth)
    out = score(x, t)
    if use_align:
        res = align(x, t)
        out["flip180"] = res.flip180
        out["shift"] = list(res.shift)
        out["ssim_aligned"] = ssim(res.aligned, t) if min(t.shape) >= 11 else float("nan")
    return out


def run_sweep(spec: ExperimentSpec, kappa3s, lams):
    """Accelerated runs over a kappa3 x lambda grid plus the vanilla reference."""
    all_rows, all_means, all_traces = [], [], {}
    base = dict(spec.overrides)
    runs = [("vanilla", {}, "vanilla")]
    runs += [("accelerated", {"kappa3": k3, "lambda": lam}, f"k3={k3}_lam={lam}")
             for k3 in kappa3s for lam in lams]
    for mode, extra, tag in runs:
        sub = replace(spec, modes=[mode], overrides={**base, **extra},
                      out=os.path.join(spec.out, tag))
        rows, means, traces = run_bench(sub)
        for row in rows + means:
            row.mode = f"{mode}[{tag}]" if extra else mode
        all_rows += rows
        all_means += means
        all_traces.update({f"{tag}/{k}": v for k, v in traces.items()})
    write_results(os.path.join(spec.out, "results.csv"), all_rows, all_means)
    write_timings(os.path.join(spec.out, "timings.csv"), all_rows, all_means)
    emit_plotdata(all_traces, os.path.join(spec.out, "plotdata.csv"))
    return all_rows, all_means, all_traces


SPEC_FIELDS = {f.name for f in fields(ExperimentSpec)}


def load_config(path) -> dict:
    """Read a JSON config: ``{"defaults": {...solver...}, "experiment": {...}}``."""
    with open(path) as fh:
        cfg = json.load(fh)
    unknown = set(cfg) - {"defaults", "experiment"}
    if unknown:
        raise ValueError(f"unknown top-level config keys: {sorted(unknown)}")
    exp = cfg.get("experiment", {})
    bad = set(exp) - SPEC_FIELDS
    if bad:
        raise ValueError(f"unknown experiment keys: {sorted(bad)}")
    return cfg
