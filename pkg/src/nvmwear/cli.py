"""Command-line front end: generate traces, run simulations, shape reports.

Exit codes: 0 on success, 1 on runtime errors (missing files, simulation
errors), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from pathlib import Path
from typing import Dict, Optional

from . import engine, metrics
from .errors import ConfigError, SimulationError
from .trace import Trace, gen_workload, load_trace, make_layout, save_trace

_BOOL_FIELDS = {"enable_coarse", "enable_fine"}
_OPTIONAL_INT_FIELDS = {"pool_pages"}


def write_atomic(path: Path, data: bytes):
    """Write via a temp file plus rename; readers never see partial files."""
    path = Path(path)
    tmp = path.parent / (path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def parse_config_file(path) -> Dict:
    """Flat `key = value` file with SimConfig field names."""
    out: Dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError("%s line %d: expected key = value"
                                  % (path, line_no))
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in engine.SimConfig.__dataclass_fields__:
                raise ConfigError("%s line %d: unknown key %r"
                                  % (path, line_no, key))
            if key in _BOOL_FIELDS:
                if value.lower() in ("true", "1", "yes", "on"):
                    out[key] = True
                elif value.lower() in ("false", "0", "no", "off"):
                    out[key] = False
                else:
                    raise ConfigError("%s line %d: bad boolean %r"
                                      % (path, line_no, value))
            elif key in _OPTIONAL_INT_FIELDS and value.lower() == "none":
                out[key] = None
            else:
                try:
                    out[key] = int(value)
                except ValueError:
                    raise ConfigError("%s line %d: bad integer %r"
                                      % (path, line_no, value))
    return out


def _layout_from_args(args):
    return make_layout(text_pages=args.text_pages, data_pages=args.data_pages,
                       bss_pages=args.bss_pages, stack_pages=args.stack_pages)


def _add_layout_flags(p):
    p.add_argument("--text-pages", type=int, default=2)
    p.add_argument("--data-pages", type=int, default=8)
    p.add_argument("--bss-pages", type=int, default=4)
    p.add_argument("--stack-pages", type=int, default=4)


def _resolve_trace(args) -> tuple[Trace, Dict]:
    if args.trace is not None:
        if not os.path.exists(args.trace):
            raise SimulationError("trace file not found: %s" % args.trace)
        return load_trace(args.trace), {"path": str(args.trace)}
    layout = _layout_from_args(args)
    trace = gen_workload(args.kind, args.writes, layout, args.seed)
    desc = {"kind": args.kind, "writes": args.writes, "seed": args.seed,
            "text_pages": args.text_pages, "data_pages": args.data_pages,
            "bss_pages": args.bss_pages, "stack_pages": args.stack_pages}
    return trace, desc


def _build_config(args) -> engine.SimConfig:
    values = engine.SimConfig().to_dict()
    if args.config is not None:
        values.update(parse_config_file(args.config))
    overrides = {
        "sample_interval_n": args.n,
        "remap_threshold_t": args.t,
        "stack_step": args.step,
        "enable_coarse": args.coarse,
        "enable_fine": args.fine,
        "pool_pages": args.pool_pages,
        "fixed_valid_stack": args.fixed_valid_stack,
        "seed": args.seed if args.trace is None else args.sim_seed,
    }
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    return engine.SimConfig.from_dict(values)


def _report_csv_bytes(doc: Dict) -> bytes:
    rows = ["section,key,value"]

    def flatten(section, obj):
        for key, val in obj.items():
            if isinstance(val, dict):
                flatten("%s.%s" % (section, key), val)
            else:
                rows.append("%s,%s,%s" % (section, key, json.dumps(val)))

    for section in ("config", "totals", "metrics", "per_segment"):
        flatten(section, doc[section])
    rows.append("")
    return "\n".join(rows).encode("utf-8")


def _run_one(trace: Trace, config: engine.SimConfig, out_dir: Path,
             fmt: str, trace_desc: Dict) -> Dict:
    baseline, leveled, paired = engine.paired_run(trace, config)
    doc = engine.report_dict(trace, config, baseline, leveled, paired,
                             trace_desc=trace_desc)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_bytes = (json.dumps(doc, indent=1) + "\n").encode("utf-8")
    if fmt == "json":
        write_atomic(out_dir / "report.json", report_bytes)
    else:
        write_atomic(out_dir / "report.csv", _report_csv_bytes(doc))
        write_atomic(out_dir / "report.json", report_bytes)
    write_atomic(out_dir / "baseline_wear.csv",
                 baseline.space.wear_csv_bytes())
    write_atomic(out_dir / "leveled_wear.csv", leveled.space.wear_csv_bytes())
    write_atomic(out_dir / "sample_log.csv", engine.sample_log_csv(leveled))
    write_atomic(out_dir / "remap_log.csv", engine.remap_log_csv(leveled))
    write_atomic(out_dir / "relocation_log.csv",
                 engine.relocation_log_csv(leveled))
    if leveled.sampler is not None:
        space = leveled.space
        fbase = space.base >> space.page_shift
        write_atomic(out_dir / "estimates.csv",
                     leveled.sampler.to_csv_bytes(lambda f: fbase + f))
    m = doc["metrics"]
    print("AE=%.4f WO=%.4f EI=%.4f NE=%.4f LI=%.4f"
          % (m["AE"], m["WO"], m["EI"], m["NE"], m["LI"]))
    return doc


def cmd_gen(args) -> int:
    layout = _layout_from_args(args)
    trace = gen_workload(args.kind, args.writes, layout, args.seed)
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    save_trace(trace, out)
    print("wrote %s: %d events (%d writes), %d segments"
          % (out, trace.n_events, trace.n_writes, len(layout.segments)))
    return 0


def _parse_int_list(text: str):
    return [int(tok) for tok in text.split(",") if tok]


def cmd_run(args) -> int:
    trace, trace_desc = _resolve_trace(args)
    out_dir = Path(args.out)
    if args.sweep:
        n_values = _parse_int_list(args.n) if args.n else \
            [engine.SimConfig().sample_interval_n]
        t_values = _parse_int_list(args.t) if args.t else \
            [engine.SimConfig().remap_threshold_t]
        saved_n, saved_t = args.n, args.t
        for n_val, t_val in itertools.product(n_values, t_values):
            args.n, args.t = n_val, t_val
            config = _build_config(args)
            sub = out_dir / ("n%d_t%d" % (n_val, t_val))
            print("config n=%d t=%d:" % (n_val, t_val), end=" ")
            _run_one(trace, config, sub, args.format, trace_desc)
        args.n, args.t = saved_n, saved_t
    else:
        args.n = int(args.n) if args.n is not None else None
        args.t = int(args.t) if args.t is not None else None
        config = _build_config(args)
        _run_one(trace, config, out_dir, args.format, trace_desc)
    return 0


def cmd_report(args) -> int:
    run_dir = Path(args.run)
    report_path = run_dir / "report.json"
    if not report_path.exists():
        raise SimulationError("no report.json under %s" % run_dir)
    with open(report_path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    with open(run_dir / "leveled_wear.csv", "rb") as fh:
        wear_rows = {}
        for line in fh.read().decode("utf-8").splitlines()[1:]:
            if not line or line.startswith("#"):
                continue
            idx, _, count = line.split(",")
            wear_rows[int(idx)] = int(count)

    line_size = doc["config"]["layout"]["line_size"]
    segments = [(name, int(start, 16), int(end, 16))
                for name, start, end in doc["config"]["layout"]["segments"]]
    if args.segment is not None:
        segments = [s for s in segments if s[0] == args.segment]
        if not segments:
            raise SimulationError("no segment named %r in the report"
                                  % args.segment)
    out_dir = Path(args.out) if args.out else run_dir / "report"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, start, end in segments:
        counts = {idx: wear_rows.get(idx, 0)
                  for idx in range(start // line_size, end // line_size)}
        if args.bins == "log2":
            bins = metrics.log2_bins(counts.values())
            rows = ["bin,lines"]
            rows.extend("%d,%d" % (b, c) for b, c in bins.items())
            rows.append("")
            payload = "\n".join(rows).encode("utf-8")
            path = out_dir / ("%s_log2.csv" % name)
        else:
            payload = metrics.export_histogram(counts, "csv")
            path = out_dir / ("%s.csv" % name)
        write_atomic(path, payload)
        print("wrote %s" % path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvmwear",
        description="Trace-driven simulator for software-only NVM "
                    "wear-leveling.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a synthetic write trace")
    p_gen.add_argument("--kind", required=True,
                       choices=("hotspot", "stream", "deepstack", "queue"))
    p_gen.add_argument("--writes", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    _add_layout_flags(p_gen)
    p_gen.set_defaults(func=cmd_gen)

    p_run = sub.add_parser("run", help="replay a trace and report metrics")
    src = p_run.add_mutually_exclusive_group(required=True)
    src.add_argument("--trace", help="trace file to replay")
    src.add_argument("--kind",
                     choices=("hotspot", "stream", "deepstack", "queue"),
                     help="generate this workload instead of reading a file")
    p_run.add_argument("--writes", type=int, default=100000)
    p_run.add_argument("--seed", type=int, default=0,
                       help="generator seed (also the config seed)")
    p_run.add_argument("--sim-seed", type=int, default=None)
    p_run.add_argument("--config", help="flat key = value config file")
    p_run.add_argument("--n", default=None,
                       help="sampling interval (comma list with --sweep)")
    p_run.add_argument("--t", default=None,
                       help="remap threshold (comma list with --sweep)")
    p_run.add_argument("--step", type=int, default=None,
                       help="stack relocation step in bytes")
    p_run.add_argument("--coarse", action=argparse.BooleanOptionalAction,
                       default=None, help="toggle coarse page remapping")
    p_run.add_argument("--fine", action=argparse.BooleanOptionalAction,
                       default=None, help="toggle fine stack relocation")
    p_run.add_argument("--pool-pages", type=int, default=None)
    p_run.add_argument("--fixed-valid-stack", type=int, default=None)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--format", choices=("json", "csv"), default="json")
    p_run.add_argument("--sweep", action="store_true",
                       help="run every n x t combination into subdirectories")
    _add_layout_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("report", help="per-segment histograms for a run")
    p_rep.add_argument("--run", required=True, help="finished run directory")
    p_rep.add_argument("--segment", default=None)
    p_rep.add_argument("--bins", choices=("log2",), default=None)
    p_rep.add_argument("--out", default=None)
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SimulationError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
