"""Benchmark harness: k-fold protocol, method sweeps, CSV reports, SVG plots.

For each autoencoder cell (variant, k, fold rotation, repetition) a model is
trained once and evaluated at every error bound, so compression-ratio curves
over bounds share the same weights. Baselines run once per fold (they have no
init randomness). Rows aggregate bits across all cells, so the reported CR is
recomputable from the bit columns exactly.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import baselines, codec, dataset, metrics, residual, svgplot
from .autoencoder import CostConfig
from .optimizer import LbfgsOptions, train

AE_VARIANTS = ("ae", "wae", "sae")
BASELINE_METHODS = ("ltc", "lzw", "pca", "dct")

RAW_BITS_PER_READING = 32  # uncompressed readings counted as 32-bit floats


@dataclass(frozen=True)
class BenchmarkConfig:
    # dataset source: CSV file or seeded synthetic matrix
    csv_path: str | None = None
    timestamp_column: str = "t"
    sensors: int = 23
    steps: int = 20000
    noise_sd: float = 0.05
    period_range: tuple[float, float] = (20.0, 300.0)
    amp_range: tuple[float, float] = (1.0, 6.0)
    # windowing
    mode: str = "temporal"
    window: int = 24
    stride: int | None = None
    # sweeps
    k_list: tuple[int, ...] = (4,)
    bounds: tuple[float, ...] = (0.1, 0.5, 1.0, 2.0)
    variants: tuple[str, ...] = ("ae", "wae", "sae")
    baseline_methods: tuple[str, ...] = BASELINE_METHODS
    # protocol
    folds: int = 10
    repetitions: int = 20
    fold_rotations: int | None = None  # None = all folds; smaller for quick runs
    seed: int = 0
    # hyperparameters
    beta: float = 1e-4
    eta: float = 0.1
    rho: float = 0.05
    optimizer: LbfgsOptions = field(default_factory=LbfgsOptions)

    def __post_init__(self):
        if not self.k_list or not self.bounds:
            raise ValueError("k and bound sweep lists must be non-empty")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for v in self.variants:
            if v not in AE_VARIANTS:
                raise ValueError(f"unknown variant {v!r}")
        for m in self.baseline_methods:
            if m not in BASELINE_METHODS:
                raise ValueError(f"unknown baseline {m!r}")


def _cell_seed(base: int, *parts: int) -> int:
    return int(np.random.SeedSequence([base, *parts]).generate_state(1)[0])


def load_windows(cfg: BenchmarkConfig) -> list[dataset.DataVector]:
    if cfg.csv_path is not None:
        matrix = dataset.fill_missing(
            dataset.load_csv(cfg.csv_path, dataset.CsvSchema(timestamp=cfg.timestamp_column))
        )
    else:
        matrix = dataset.synth_dataset(
            cfg.sensors, cfg.steps, cfg.seed, cfg.noise_sd,
            period_range=cfg.period_range, amp_range=cfg.amp_range,
        )
    n = cfg.window if cfg.mode == "temporal" else matrix.n_sensors
    return dataset.make_windows(matrix, cfg.mode, n, cfg.stride)


@dataclass
class _CellResult:
    """Per-(method, bound) tallies for one harness cell."""

    bits_code: int = 0
    bits_residual: int = 0
    bits_raw: int = 0
    abs_err_sum: float = 0.0
    abs_err_count: int = 0
    rel_err_sum: float = 0.0
    rel_err_windows: int = 0
    wall_time: float = 0.0

    def add_window(self, p: np.ndarray, q: np.ndarray, bits_code: int, bits_residual: int):
        n = p.shape[0]
        self.bits_code += bits_code
        self.bits_residual += bits_residual
        self.bits_raw += RAW_BITS_PER_READING * n
        self.abs_err_sum += float(np.sum(np.abs(p - q)))
        self.abs_err_count += n
        denom = float(np.sum(p**2))
        if denom > 0:
            self.rel_err_sum += 100.0 * float(np.sum((p - q) ** 2)) / denom
            self.rel_err_windows += 1

    def merge(self, other: "_CellResult"):
        self.bits_code += other.bits_code
        self.bits_residual += other.bits_residual
        self.bits_raw += other.bits_raw
        self.abs_err_sum += other.abs_err_sum
        self.abs_err_count += other.abs_err_count
        self.rel_err_sum += other.rel_err_sum
        self.rel_err_windows += other.rel_err_windows
        self.wall_time += other.wall_time


def _eval_ae_cell(train_vecs, test_vecs, variant, k, cfg: BenchmarkConfig, seed):
    """Train one model, evaluate every bound on the test fold."""
    cost_cfg = CostConfig(variant=variant, beta=cfg.beta, eta=cfg.eta, rho=cfg.rho)
    n = len(train_vecs[0])
    model, _ = train(train_vecs, n, k, cost_cfg, cfg.optimizer, seed)
    out = {}
    for bound in cfg.bounds:
        cell = _CellResult()
        t0 = time.perf_counter()
        for p in test_vecs:
            pkt = codec.compress(p, model, bound)
            q = codec.decompress(pkt, model)
            bc, br = codec.packet_size_bits(pkt, n, k)
            cell.add_window(p.entries, q, bc, br)
        cell.wall_time = time.perf_counter() - t0
        out[bound] = cell
    return out


def _eval_baseline_cell(method, train_vecs, test_vecs, k, cfg: BenchmarkConfig):
    n = len(test_vecs[0])
    out = {}
    basis = None
    if method == "pca":
        basis = baselines.pca_fit(train_vecs, k)
    for bound in cfg.bounds:
        cell = _CellResult()
        t0 = time.perf_counter()
        for p in test_vecs:
            series = p.entries
            if method == "ltc":
                segs = baselines.ltc_compress(series, bound)
                q = baselines.ltc_decompress(segs)
                cell.add_window(series, q, baselines.ltc_bits(segs), 0)
            elif method == "lzw":
                blob = baselines.lzw_truncated_compress(series, bound)
                q = baselines.lzw_truncated_decompress(blob, n)
                cell.add_window(series, q, baselines.lzw_code_bits(blob), 0)
            elif method == "pca":
                coeffs = baselines.pca_compress(series, basis)
                recon = baselines.pca_decompress(coeffs, basis)
                code = residual.residual_code(series - recon, bound)
                q = recon + residual.residual_decode(code, n)
                cell.add_window(series, q, 32 * k, n + 32 * code.count)
            elif method == "dct":
                pairs = baselines.dct_compress(series, k)
                recon = baselines.dct_decompress(pairs, n)
                code = residual.residual_code(series - recon, bound)
                q = recon + residual.residual_decode(code, n)
                idx_bits = max(1, math.ceil(math.log2(n)))
                cell.add_window(series, q, k * (32 + idx_bits), n + 32 * code.count)
        cell.wall_time = time.perf_counter() - t0
        out[bound] = cell
    return out


def run_benchmark(cfg: BenchmarkConfig) -> list[metrics.EvalRow]:
    """Run the full sweep; one row per (method label, bound), failures tallied per row."""
    windows = load_windows(cfg)
    split = dataset.split_folds(len(windows), cfg.folds, cfg.seed)
    rotations = range(cfg.folds if cfg.fold_rotations is None else min(cfg.fold_rotations, cfg.folds))

    # cell task list; keys sort deterministically regardless of execution order
    tasks = []  # (key, label, callable)
    for fold in rotations:
        test_idx = split.indices_of(fold)
        train_idx = np.nonzero(split.fold_assignment != fold)[0]
        train_vecs = [windows[i] for i in train_idx]
        test_vecs = [windows[i] for i in test_idx]
        for vi, variant in enumerate(cfg.variants):
            for k in cfg.k_list:
                for rep in range(cfg.repetitions):
                    seed = _cell_seed(cfg.seed, vi, k, fold, rep)
                    label = f"{variant.upper()}(k={k})"
                    tasks.append(
                        (
                            (0, variant, k, fold, rep),
                            label,
                            lambda tv=train_vecs, sv=test_vecs, v=variant, kk=k, s=seed: _eval_ae_cell(
                                tv, sv, v, kk, cfg, s
                            ),
                        )
                    )
        for method in cfg.baseline_methods:
            ks = cfg.k_list if method in ("pca", "dct") else (0,)
            for k in ks:
                label = f"{method.upper()}(k={k})" if k else method.upper()
                tasks.append(
                    (
                        (1, method, k, fold, 0),
                        label,
                        lambda tv=train_vecs, sv=test_vecs, m=method, kk=k: _eval_baseline_cell(
                            m, tv, sv, kk, cfg
                        ),
                    )
                )

    n_threads = int(os.environ.get("AEB_THREADS", "1"))
    results: dict[tuple, object] = {}
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            futures = {key: pool.submit(_run_cell, fn) for key, _, fn in tasks}
            for key, fut in futures.items():
                results[key] = fut.result()
    else:
        for key, _, fn in tasks:
            results[key] = _run_cell(fn)

    # deterministic aggregation order
    agg: dict[tuple[str, float], _CellResult] = {}
    failures: dict[tuple[str, float], str] = {}
    labels = {key: label for key, label, _ in tasks}
    for key in sorted(results):
        label = labels[key]
        outcome = results[key]
        if isinstance(outcome, Exception):
            for bound in cfg.bounds:
                failures.setdefault((label, bound), f"{type(outcome).__name__}: {outcome}")
            continue
        for bound, cell in outcome.items():
            agg.setdefault((label, bound), _CellResult()).merge(cell)

    rows = []
    seen = sorted(set(agg) | set(failures), key=lambda kb: (kb[0], kb[1]))
    for label, bound in seen:
        if (label, bound) in agg:
            cell = agg[(label, bound)]
            rows.append(
                metrics.EvalRow(
                    method=label,
                    epsilon_bound=bound,
                    cr=metrics.compression_ratio(cell.bits_code, cell.bits_residual, cell.bits_raw),
                    eps_abs=cell.abs_err_sum / cell.abs_err_count,
                    eps_rel=cell.rel_err_sum / max(1, cell.rel_err_windows),
                    bits_code=cell.bits_code,
                    bits_residual=cell.bits_residual,
                    bits_raw=cell.bits_raw,
                    wall_time=cell.wall_time,
                    status="ok" if (label, bound) not in failures else "partial:" + failures[(label, bound)],
                )
            )
        else:
            rows.append(
                metrics.EvalRow(
                    method=label,
                    epsilon_bound=bound,
                    cr=float("nan"),
                    eps_abs=float("nan"),
                    eps_rel=float("nan"),
                    bits_code=0,
                    bits_residual=0,
                    bits_raw=0,
                    wall_time=0.0,
                    status="failed:" + failures[(label, bound)],
                )
            )
    return rows


def _run_cell(fn):
    try:
        return fn()
    except Exception as exc:  # recorded per-row; the harness keeps going
        return exc


CSV_HEADER = "method,bound,cr,eps_abs,eps_rel,bits_code,bits_residual,bits_raw,wall_time,status"


def write_report(rows: list[metrics.EvalRow], cfg: BenchmarkConfig, outdir) -> None:
    """Emit report.csv, manifest.json and the three Fig-style SVG charts."""
    os.makedirs(outdir, exist_ok=True)
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.method},{r.epsilon_bound!r},{r.cr!r},{r.eps_abs!r},{r.eps_rel!r},"
            f"{r.bits_code},{r.bits_residual},{r.bits_raw},{r.wall_time:.3f},{r.status}"
        )
    with open(os.path.join(outdir, "report.csv"), "w") as fh:
        fh.write("\n".join(lines) + "\n")

    manifest = {
        "config": _config_dict(cfg),
        "seed": cfg.seed,
        "raw_bits_per_reading": RAW_BITS_PER_READING,
        "version": _package_version(),
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    write_plots(rows, outdir)


def write_plots(rows: list[metrics.EvalRow], outdir) -> None:
    ok = [r for r in rows if r.status.startswith(("ok", "partial"))]
    by_method: dict[str, list[metrics.EvalRow]] = {}
    for r in ok:
        by_method.setdefault(r.method, []).append(r)
    svgplot.line_chart(
        {m: [(r.eps_rel, r.cr) for r in rs] for m, rs in by_method.items()},
        "relative error (%)", "compression ratio (%)", "Compression ratio vs relative error",
        os.path.join(outdir, "cr_vs_eps_rel.svg"),
    )
    svgplot.line_chart(
        {m: [(r.eps_abs, r.cr) for r in rs] for m, rs in by_method.items()},
        "mean absolute error", "compression ratio (%)", "Compression ratio vs mean absolute error",
        os.path.join(outdir, "cr_vs_eps_abs.svg"),
    )
    svgplot.line_chart(
        {m: [(r.epsilon_bound, r.cr) for r in rs] for m, rs in by_method.items()},
        "error bound", "compression ratio (%)", "Error bound vs compression ratio",
        os.path.join(outdir, "bound_vs_cr.svg"),
    )


def _config_dict(cfg: BenchmarkConfig) -> dict:
    d = asdict(cfg)
    d["optimizer"] = asdict(cfg.optimizer)
    return d


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("aebound")
    except Exception:
        return "unknown"
