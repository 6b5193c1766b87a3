"""Command-line entry point: train, compress, decompress, bench, report."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import codec, dataset, harness
from .autoencoder import CostConfig
from .errors import AeboundError, FormatError
from .optimizer import LbfgsOptions, train as train_model

class UsageError(Exception):
    """Bad configuration or arguments; maps to exit code 2."""


_LIST_KEYS = {"k", "bounds", "variants", "baselines", "period_range", "amp_range"}
_INT_KEYS = {"sensors", "steps", "window", "stride", "folds", "repetitions", "seed",
             "fold_rotations", "history", "max_iters", "max_line_search_steps"}
_FLOAT_KEYS = {"noise_sd", "beta", "eta", "rho", "grad_tol", "wolfe_c1", "wolfe_c2"}


def parse_config_file(path) -> dict:
    """key=value lines; '#' comments; lists are comma-separated."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = value
    return out


def _coerce(key: str, value: str):
    if key in _LIST_KEYS:
        items = [v.strip() for v in value.split(",") if v.strip()]
        if key == "k":
            return tuple(int(v) for v in items)
        if key in ("bounds", "period_range", "amp_range"):
            return tuple(float(v) for v in items)
        return tuple(items)
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    return value


def build_config(args) -> harness.BenchmarkConfig:
    raw = parse_config_file(args.config) if args.config else {}
    for key, value in (args.set or []):
        raw[key] = value
    cfg = {k: _coerce(k, v) if isinstance(v, str) else v for k, v in raw.items()}

    opt_keys = {"history", "max_iters", "grad_tol", "wolfe_c1", "wolfe_c2", "max_line_search_steps"}
    opts = LbfgsOptions(**{k: cfg.pop(k) for k in list(cfg) if k in opt_keys})

    rename = {"k": "k_list", "baselines": "baseline_methods", "csv": "csv_path"}
    kwargs = {rename.get(k, k): v for k, v in cfg.items() if k != "dataset"}
    if cfg.get("dataset", "synth") == "csv" and "csv_path" not in kwargs:
        raise UsageError("dataset=csv requires csv=<path>")
    if getattr(args, "seed", None) is not None:
        kwargs["seed"] = args.seed
    return harness.BenchmarkConfig(optimizer=opts, **kwargs)


def cmd_train(args) -> int:
    cfg = build_config(args)
    windows = harness.load_windows(cfg)
    variant = cfg.variants[0]
    k = cfg.k_list[0]
    n = len(windows[0])
    cost_cfg = CostConfig(variant=variant, beta=cfg.beta, eta=cfg.eta, rho=cfg.rho)
    model, trace = train_model(windows, n, k, cost_cfg, cfg.optimizer, cfg.seed)
    bound = cfg.bounds[0]
    codec.save_model(model, bound, args.out)
    print(
        f"trained {variant.upper()} n={n} k={k} on {len(windows)} vectors: "
        f"{trace.iterations} iterations, cost {trace.cost_history[0]:.6g} -> "
        f"{trace.cost_history[-1]:.6g}, grad norm {trace.final_grad_norm:.3g}, "
        f"stop={trace.stop_reason}"
    )
    print(f"model written to {args.out}")
    return 0


def _csv_windows(path, timestamp_column, model, mode):
    matrix = dataset.fill_missing(
        dataset.load_csv(path, dataset.CsvSchema(timestamp=timestamp_column))
    )
    n = model.n
    return dataset.make_windows(matrix, mode, n)


def cmd_compress(args) -> int:
    model, default_bound = codec.load_model(args.model)
    bound = default_bound if args.bound is None else args.bound
    windows = _csv_windows(args.input, args.timestamp_column, model, args.mode)
    wide = bound == 0.0
    packets = [codec.compress(p, model, bound) for p in windows]
    codec.write_packet_stream(packets, model.n, model.k, args.out, wide_residuals=wide)
    if args.verify:
        worst = 0.0
        for p, pkt in zip(windows, packets):
            q = codec.decompress(pkt, model)
            worst = max(worst, float(np.max(np.abs(p.entries - q))))
        if worst > bound:
            print(f"VERIFY FAILED: max error {worst} > bound {bound}", file=sys.stderr)
            return 1
        print(f"verify ok: max reconstruction error {worst:.6g} <= bound {bound}")
    print(f"wrote {len(packets)} packets to {args.out}")
    return 0


def cmd_decompress(args) -> int:
    model, default_bound = codec.load_model(args.model)
    wide = default_bound == 0.0
    packets = codec.read_packet_stream(args.packets, model.n, model.k, wide_residuals=wide)
    with open(args.out, "w") as fh:
        fh.write("window," + ",".join(f"v{i}" for i in range(model.n)) + "\n")
        for i, pkt in enumerate(packets):
            q = codec.decompress(pkt, model)
            fh.write(f"{i}," + ",".join(repr(float(v)) for v in q) + "\n")
    print(f"decompressed {len(packets)} packets to {args.out}")
    return 0


def cmd_bench(args) -> int:
    cfg = build_config(args)
    rows = harness.run_benchmark(cfg)
    harness.write_report(rows, cfg, args.out)
    n_failed = sum(1 for r in rows if r.status.startswith("failed"))
    print(f"wrote {len(rows)} rows to {os.path.join(args.out, 'report.csv')}"
          + (f" ({n_failed} failed)" if n_failed else ""))
    return 0


def cmd_report(args) -> int:
    from .metrics import EvalRow

    rows = []
    with open(os.path.join(args.report_dir, "report.csv")) as fh:
        header = fh.readline().strip()
        if header != harness.CSV_HEADER:
            raise FormatError(f"unexpected report header: {header}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            rows.append(
                EvalRow(
                    method=parts[0], epsilon_bound=float(parts[1]), cr=float(parts[2]),
                    eps_abs=float(parts[3]), eps_rel=float(parts[4]), bits_code=int(parts[5]),
                    bits_residual=int(parts[6]), bits_raw=int(parts[7]),
                    wall_time=float(parts[8]), status=",".join(parts[9:]),
                )
            )
    harness.write_plots(rows, args.report_dir)
    print(f"plots written to {args.report_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aebound", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_args(p, seed_required=False):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--set", nargs=2, action="append", metavar=("KEY", "VALUE"),
                       help="override a config key")
        p.add_argument("--seed", type=int, required=seed_required, default=None)

    p = sub.add_parser("train", help="fit a model and write a model file")
    add_config_args(p)
    p.add_argument("--out", required=True, help="output model file")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("compress", help="compress a CSV into a packet stream")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="input CSV")
    p.add_argument("--timestamp-column", default="t")
    p.add_argument("--mode", choices=("temporal", "spatial"), default="temporal")
    p.add_argument("--bound", type=float, default=None, help="override the model's default bound")
    p.add_argument("--out", required=True)
    p.add_argument("--verify", action="store_true", help="check the bound against the original")
    p.set_defaults(fn=cmd_compress)

    p = sub.add_parser("decompress", help="decompress a packet stream into a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--packets", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_decompress)

    p = sub.add_parser("bench", help="run the benchmark sweep and write a report")
    add_config_args(p, seed_required=True)
    p.add_argument("--out", required=True, help="report directory")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("report", help="regenerate plots from an existing report.csv")
    p.add_argument("--report-dir", required=True)
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (AeboundError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
