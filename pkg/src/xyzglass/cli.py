"""Command-line front end.

    python3 -m xyzglass --config run.ini --output out/

writes ``out/results.csv`` and ``out/metadata.txt``. Progress goes to
stderr; stdout carries only a short machine-readable summary.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

from . import __version__
from .config import ConfigError, RunConfig, parse_config
from .quench import OBSERVABLES, enhancement_record, ordered_reference, quenched_average
from .scan import VARIANTS, GridSpec, critical_field, grid_scan, line_scan, venus_from_scan

SCHEMA = "xyzglass-csv/1"
NA = "NA"


def _fmt(x):
    if x is None:
        return NA
    if isinstance(x, (bool,)):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    x = float(x)
    return repr(x) if math.isfinite(x) else NA


def _record_columns(prefix=""):
    cols = []
    for k in OBSERVABLES:
        cols += [f"{prefix}{k}_mean", f"{prefix}{k}_stderr", f"{prefix}{k}_delta"]
    return cols + [f"{prefix}degenerate", f"{prefix}failed", f"{prefix}converged"]


def _record_values(rec):
    if rec is None:
        return [None] * (3 * len(OBSERVABLES) + 3)
    out = []
    for k in OBSERVABLES:
        est = rec.quenched[k]
        out += [est.mean, est.stderr, rec.delta[k]]
    first = rec.quenched[OBSERVABLES[0]]
    out += [first.degenerate_count, first.failed_count,
            int(all(rec.quenched[k].converged for k in OBSERVABLES
                    if math.isfinite(rec.quenched[k].mean)))]
    return out


def _ordered_columns():
    return [f"ordered_{k}" for k in OBSERVABLES]


class Progress:
    def __init__(self, label, stream=sys.stderr, quiet=False):
        self.label = label
        self.stream = stream
        self.quiet = quiet

    def __call__(self, done, total):
        if not self.quiet:
            print(f"[{self.label}] {done}/{total}", file=self.stream, flush=True)


def _single(cfg, progress):
    p, case, q = cfg.model, cfg.disorder, cfg.quench
    ref = ordered_reference(p, case.lam, case.mu, q, cfg.site, cfg.pair)
    quenched = quenched_average(p, case, q, cfg.site, cfg.pair)
    rec = enhancement_record(quenched, ref, case.variant.value)
    progress(1, 1)
    header = ["lam", "mu"] + _ordered_columns() + _record_columns()
    row = [case.lam, case.mu] + [getattr(ref, k) for k in OBSERVABLES] + _record_values(rec)
    summary = {f"{k}_mean": _fmt(rec.quenched[k].mean) for k in OBSERVABLES}
    return header, [row], summary


def _scan2d(cfg, progress):
    spec = GridSpec(cfg.model, cfg.disorder, cfg.axis1, cfg.axis2)
    points = grid_scan(spec, cfg.quench, cfg.site, cfg.pair, progress)
    names = [cfg.axis1.name] + ([cfg.axis2.name] if cfg.axis2 else [])
    header = names + _ordered_columns() + _record_columns() + ["error"]
    rows = []
    for pt in points:
        ordered = [pt.record.ordered[k] if pt.record else None for k in OBSERVABLES]
        rows.append([pt.coords[n] for n in names] + ordered + _record_values(pt.record)
                    + [pt.error.replace(",", ";") if pt.error else NA])
    failed = sum(pt.error is not None for pt in points)
    return header, rows, {"points": str(len(points)), "failed_points": str(failed)}


def _line(cfg, progress):
    c = cfg.disorder
    scan = line_scan(cfg.model, cfg.axis1.values, c.mu, cfg.quench, c.sigma_J, c.sigma_delta,
                     VARIANTS, cfg.site, cfg.pair, progress)
    header = ["alpha"] + _ordered_columns()
    for v in VARIANTS:
        header += _record_columns(f"{v.value}_")
    rows = []
    for n, a in enumerate(scan.alphas):
        row = [a] + [getattr(scan.ordered[n], k) for k in OBSERVABLES]
        for v in VARIANTS:
            row += _record_values(scan.records[v][n])
        rows.append(row)
    return scan, header, rows


def _scan1d(cfg, progress):
    scan, header, rows = _line(cfg, progress)
    return header, rows, {"points": str(len(rows))}


def _format_intervals(intervals):
    return ";".join(f"[{lo!r},{hi!r}]" for lo, hi in intervals) or "none"


def _venus(cfg, progress):
    scan, header, rows = _line(cfg, progress)
    summary = {}
    for k in OBSERVABLES:
        if k == "ggm" and cfg.model.N > cfg.quench.ggm_max_sites:
            summary[f"venus_{k}"] = NA
            continue
        region = venus_from_scan(scan, k, cfg.venus.eps_abs, cfg.venus.k)
        summary[f"venus_{k}"] = _format_intervals(region.intervals)
    return header, rows, summary


def _hc(cfg, progress):
    m = cfg.model
    delta_mean = cfg.hc.delta_mean if cfg.hc.delta_mean is not None else cfg.disorder.mu * m.h

    def report(h, intervals):
        print(f"[hc] h={h!r} intervals={_format_intervals(intervals)}", file=sys.stderr,
              flush=True)

    res = critical_field(m.N, m.gamma, delta_mean, cfg.axis1.values,
                         (cfg.hc.h_low, cfg.hc.h_high), cfg.quench, m.boundary, cfg.hc.tol,
                         cfg.hc.observable, cfg.venus.eps_abs, cfg.venus.k,
                         cfg.hc.coupling_sigma, progress=None if progress.quiet else report)
    header = ["h", "has_venus", "intervals"]
    rows = [[h, int(bool(iv)), _format_intervals(iv).replace(",", " ")] for h, iv in res.probes]
    summary = {"h_c": _fmt(res.h_c), "bracket_low": _fmt(res.bracket[0]),
               "bracket_high": _fmt(res.bracket[1])}
    return header, rows, summary


COMMAND_TABLE = {"single": _single, "scan2d": _scan2d, "scan1d": _scan1d, "venus": _venus,
                 "hc": _hc}


def write_csv(path, header, rows):
    lines = [f"# schema={SCHEMA}", ",".join(header)]
    for row in rows:
        lines.append(",".join(c if isinstance(c, str) else _fmt(c) for c in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_metadata(path, cfg: RunConfig, summary: dict, wall_time: float):
    lines = [f"schema = {SCHEMA}", f"version = {__version__}",
             f"master_seed = {cfg.quench.master_seed}", f"wall_time_s = {wall_time:.3f}"]
    for sec, items in cfg.sections().items():
        lines += [f"{sec}.{k} = {v}" for k, v in items]
    lines += [f"summary.{k} = {v}" for k, v in summary.items()]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def execute(cfg: RunConfig, quiet: bool = False, stdout=None) -> int:
    """Run ``cfg``, write results.csv and metadata.txt under ``cfg.output``."""
    stdout = stdout or sys.stdout
    t0 = time.perf_counter()
    progress = Progress(cfg.command, quiet=quiet)
    header, rows, summary = COMMAND_TABLE[cfg.command](cfg, progress)
    os.makedirs(cfg.output, exist_ok=True)
    csv_path = os.path.join(cfg.output, "results.csv")
    meta_path = os.path.join(cfg.output, "metadata.txt")
    write_csv(csv_path, header, rows)
    write_metadata(meta_path, cfg, summary, time.perf_counter() - t0)
    print(f"command = {cfg.command}", file=stdout)
    for k, v in summary.items():
        print(f"{k} = {v}", file=stdout)
    print(f"csv = {csv_path}", file=stdout)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="xyzglass",
                                 description="Quenched-disorder scans of the XYZ chain.")
    ap.add_argument("--config", required=True, help="run configuration file")
    ap.add_argument("--seed", type=int, help="master seed (overrides the config)")
    ap.add_argument("--threads", type=int, help="worker processes")
    ap.add_argument("--output", help="output directory (overrides the config)")
    ap.add_argument("--realizations", type=int, help="realizations per estimate")
    ap.add_argument("--quiet", action="store_true", help="no progress on stderr")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer", "--seed")
        cfg = cfg.with_overrides(args.seed, args.realizations, args.threads, args.output)
    except (OSError, ConfigError, ValueError) as err:
        print(f"xyzglass: configuration error: {err}", file=sys.stderr)
        return 2
    try:
        return execute(cfg, args.quiet)
    except (RuntimeError, ValueError, OSError, ArithmeticError) as err:
        print(f"xyzglass: run failed: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
