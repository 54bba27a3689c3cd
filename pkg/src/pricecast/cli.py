"""Command-line entry point: one JSON config file drives every stage.

Subcommands: ``decompose``, ``denoise``, ``train``, ``predict``,
``benchmark``, plus ``synth`` to materialize the bundled synthetic dataset.
Exit codes: 0 ok, 1 config error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .benchmark import (
    BenchmarkConfig,
    format_table_text,
    run_benchmark,
    write_table_csv,
    write_trace_csv,
)
from .denoise import DEFAULT_PE_THRESHOLD, denoise_series, write_report
from .emd import CeemdanConfig, SiftSettings, ceemdan_decompose, dump_decomposition
from .entropy import PeConfig
from .errors import ConfigError, DataError, NumericError
from .forecast import (
    DEFAULT_HIDDEN_DIM,
    DEFAULT_LAYER_DIMS,
    DEFAULT_SEQUENCE_LENGTH,
    TrainConfig,
    build_sae,
    load_model,
    predict_scaled,
    save_model,
    train_forecaster,
)
from .series import TimeSeries, WindowedDataset, fit_scale, load_series, make_windows, split
from .synthetic import DEFAULT_SYNTHETIC_LENGTH, synthetic_prices

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the subcommands need, with defaults mirroring the
    benchmark protocol (ensemble 100, entropy threshold 0.7, window 24,
    horizons 3/6/9/12, split 28032/7008)."""

    data_path: Path | None = None
    synthetic: bool = True
    synthetic_length: int = DEFAULT_SYNTHETIC_LENGTH
    synthetic_seed: int = 0
    n_train: int | None = None
    n_test: int | None = None
    window_length: int = 24
    horizons: tuple[int, ...] = (3, 6, 9, 12)
    cell_kinds: tuple[str, ...] = ("gru", "lstm")
    ceemdan: CeemdanConfig = field(default_factory=CeemdanConfig)
    pe: PeConfig = field(default_factory=PeConfig)
    pe_threshold: float = DEFAULT_PE_THRESHOLD
    layer_dims: tuple[int, ...] = DEFAULT_LAYER_DIMS
    hidden_dim: int = DEFAULT_HIDDEN_DIM
    sequence_length: int = DEFAULT_SEQUENCE_LENGTH
    train: TrainConfig = field(default_factory=TrainConfig)
    master_seed: int = 0
    output_dir: Path = Path("out")
    trace_horizon: int = 3
    trace_length: int = 288

    def load_dataset(self) -> TimeSeries:
        if self.data_path is not None:
            return load_series(self.data_path)
        if not self.synthetic:
            raise ConfigError("data: either set data.path or enable data.synthetic")
        return synthetic_prices(self.synthetic_length, self.synthetic_seed)

    def split_counts(self, n_samples: int) -> tuple[int, int]:
        # Real data defaults to the 28032/7008 protocol; synthetic data,
        # lacking explicit counts, splits 75/25.
        if self.n_train is not None and self.n_test is not None:
            return self.n_train, self.n_test
        if self.data_path is not None:
            return 28032, 7008
        n_train = 3 * n_samples // 4
        return n_train, n_samples - n_train

    def seeded_ceemdan(self) -> CeemdanConfig:
        return dataclasses.replace(self.ceemdan, rng_seed=self.master_seed)

    def benchmark_config(self, n_samples: int) -> BenchmarkConfig:
        n_train, n_test = self.split_counts(n_samples)
        return BenchmarkConfig(
            n_train=n_train,
            n_test=n_test,
            window_length=self.window_length,
            horizons=self.horizons,
            cell_kinds=self.cell_kinds,
            ceemdan=self.ceemdan,
            pe=self.pe,
            pe_threshold=self.pe_threshold,
            layer_dims=self.layer_dims,
            hidden_dim=self.hidden_dim,
            sequence_length=self.sequence_length,
            train=self.train,
            master_seed=self.master_seed,
            trace_horizon=self.trace_horizon,
            trace_length=self.trace_length,
        )


def _section(raw: dict, name: str, allowed: set[str]) -> dict:
    section = raw.pop(name, {})
    if not isinstance(section, dict):
        raise ConfigError(f"{name}: expected an object")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{name}: unknown keys {sorted(unknown)}")
    return section


def _build(section_name: str, cls, kwargs: dict):
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section_name}: {exc}") from None


def parse_config(raw: dict) -> PipelineConfig:
    """Validate a parsed JSON document; errors name the offending field."""
    raw = dict(raw)

    data = _section(raw, "data", {"path", "synthetic", "synthetic_length", "synthetic_seed"})
    split_cfg = _section(raw, "split", {"n_train", "n_test"})
    window = _section(raw, "window", {"length"})
    ceemdan_raw = _section(raw, "ceemdan", {"ensemble_size", "noise_scale", "max_imfs"})
    sift_raw = _section(raw, "sift", {"sd_threshold", "max_iterations", "envelope_tolerance"})
    pe_raw = _section(raw, "pe", {"embedding_dim", "delay", "threshold"})
    sae_raw = _section(raw, "sae", {"layer_dims"})
    model_raw = _section(raw, "model", {"hidden_dim", "sequence_length"})
    train_raw = _section(
        raw,
        "train",
        {"epochs", "batch_size", "learning_rate", "patience", "validation_fraction",
         "beta1", "beta2", "epsilon"},
    )
    trace_raw = _section(raw, "trace", {"horizon", "length"})

    top_allowed = {"horizons", "cell_kinds", "seed", "output_dir"}
    unknown = set(raw) - top_allowed
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")

    pe_threshold = pe_raw.pop("threshold", DEFAULT_PE_THRESHOLD)
    if not 0.0 < pe_threshold <= 1.0:
        raise ConfigError("pe.threshold must be in (0, 1]")

    sift = _build("sift", SiftSettings, sift_raw)
    ceemdan = _build("ceemdan", CeemdanConfig, {**ceemdan_raw, "sift": sift})
    pe = _build("pe", PeConfig, pe_raw)
    train = _build("train", TrainConfig, train_raw)

    cell_kinds = tuple(str(k).lower() for k in raw.get("cell_kinds", ("gru", "lstm")))
    for kind in cell_kinds:
        if kind not in ("gru", "lstm"):
            raise ConfigError(f"cell_kinds: unknown cell kind {kind!r}")
    horizons = tuple(raw.get("horizons", (3, 6, 9, 12)))
    if not horizons or any(int(h) < 1 for h in horizons):
        raise ConfigError("horizons: must be a non-empty list of positive hours")

    kwargs = dict(
        data_path=Path(data["path"]) if "path" in data else None,
        synthetic=bool(data.get("synthetic", "path" not in data)),
        synthetic_length=int(data.get("synthetic_length", DEFAULT_SYNTHETIC_LENGTH)),
        synthetic_seed=int(data.get("synthetic_seed", 0)),
        n_train=split_cfg.get("n_train"),
        n_test=split_cfg.get("n_test"),
        window_length=int(window.get("length", 24)),
        horizons=tuple(int(h) for h in horizons),
        cell_kinds=cell_kinds,
        ceemdan=ceemdan,
        pe=pe,
        pe_threshold=float(pe_threshold),
        layer_dims=tuple(int(d) for d in sae_raw.get("layer_dims", DEFAULT_LAYER_DIMS)),
        hidden_dim=int(model_raw.get("hidden_dim", DEFAULT_HIDDEN_DIM)),
        sequence_length=int(model_raw.get("sequence_length", DEFAULT_SEQUENCE_LENGTH)),
        train=train,
        master_seed=int(raw.get("seed", 0)),
        output_dir=Path(raw.get("output_dir", "out")),
        trace_horizon=int(trace_raw.get("horizon", 3)),
        trace_length=int(trace_raw.get("length", 288)),
    )
    config = _build("config", PipelineConfig, kwargs)
    if config.window_length < 1:
        raise ConfigError("window.length must be >= 1")
    if len(config.layer_dims) != 4:
        raise ConfigError("sae.layer_dims must have 4 entries (input + 3 hidden)")
    if config.layer_dims[0] != config.window_length:
        raise ConfigError(
            f"sae.layer_dims[0] ({config.layer_dims[0]}) must equal "
            f"window.length ({config.window_length})"
        )
    if config.hidden_dim < 1 or config.sequence_length < 1:
        raise ConfigError("model.hidden_dim and model.sequence_length must be >= 1")
    if config.trace_length < 1:
        raise ConfigError("trace.length must be >= 1")
    return config


def load_config(path: Path | None, overrides: argparse.Namespace) -> PipelineConfig:
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
    config = parse_config(raw)
    replacements = {}
    if overrides.seed is not None:
        replacements["master_seed"] = overrides.seed
    if overrides.data is not None:
        replacements["data_path"] = Path(overrides.data)
    if overrides.output_dir is not None:
        replacements["output_dir"] = Path(overrides.output_dir)
    if replacements:
        config = dataclasses.replace(config, **replacements)
    return config


def _write_series_csv(series: TimeSeries, path: Path) -> None:
    with path.open("w") as fh:
        if series.start_timestamp is not None:
            fh.write("timestamp,price\n")
            for i, value in enumerate(series.values):
                fh.write(f"{series.timestamp_at(i).isoformat()},{value:.6f}\n")
        else:
            fh.write("price\n")
            for value in series.values:
                fh.write(f"{value:.6f}\n")


def _cmd_decompose(config: PipelineConfig) -> int:
    series = config.load_dataset()
    decomp = ceemdan_decompose(series.values, config.seeded_ceemdan())
    out = config.output_dir / "decomposition.csv"
    dump_decomposition(decomp, out)
    print(f"wrote {len(decomp)} modes + residue to {out}")
    return 0


def _cmd_denoise(config: PipelineConfig) -> int:
    series = config.load_dataset()
    denoised, report = denoise_series(
        series, config.seeded_ceemdan(), config.pe, config.pe_threshold
    )
    report_path = config.output_dir / "denoise_report.json"
    series_path = config.output_dir / "denoised.csv"
    write_report(report, report_path)
    _write_series_csv(denoised, series_path)
    print(
        f"denoised {len(series)} samples: {len(report.pe_values)} modes, "
        f"partition at {report.partition}; wrote {report_path} and {series_path}"
    )
    return 0


def _train_one_horizon(config, train_scaled, scaler, horizon):
    windows = make_windows(train_scaled, config.window_length, horizon)
    sae_cfg = dataclasses.replace(
        config.train, rng_seed=config.master_seed + 100 + horizon
    )
    sae = build_sae(windows.inputs, config.layer_dims, sae_cfg)
    features = WindowedDataset(
        sae.encode(windows.inputs), windows.targets, windows.length, windows.horizon
    )
    models = {}
    for offset, kind in enumerate(config.cell_kinds, start=1):
        cfg = dataclasses.replace(
            config.train, rng_seed=config.master_seed + 1000 * horizon + offset
        )
        models[kind] = train_forecaster(
            features,
            kind,
            cfg,
            sae=sae,
            scaler=scaler,
            hidden_dim=config.hidden_dim,
            sequence_length=config.sequence_length,
        )
    return models


def _cmd_train(config: PipelineConfig) -> int:
    series = config.load_dataset()
    n_train, n_test = config.split_counts(len(series))
    train_raw, _ = split(series, n_train, n_test)
    logger.info("denoising training split (%d samples)", len(train_raw))
    train_dn, _ = denoise_series(
        train_raw, config.seeded_ceemdan(), config.pe, config.pe_threshold
    )
    train_scaled, scaler = fit_scale(train_dn)
    for horizon in config.horizons:
        models = _train_one_horizon(config, train_scaled, scaler, horizon)
        for kind, model in models.items():
            path = config.output_dir / f"model_{kind}_h{horizon}.npz"
            save_model(model, path)
            print(f"trained {kind} for horizon {horizon} -> {path}")
    return 0


def _cmd_predict(config: PipelineConfig, model_path: str, window_path: str) -> int:
    model = load_model(model_path)
    window_series = load_series(window_path)
    values = window_series.values
    need = model.input_length
    if values.shape[0] < need:
        raise DataError(
            f"window file has {values.shape[0]} values; model needs at least "
            f"{need} (window {model.window_length} + sequence "
            f"{model.sequence_length} - 1)"
        )
    scaled = model.scaler.transform(values)
    windows = np.ascontiguousarray(
        np.lib.stride_tricks.sliding_window_view(scaled, model.window_length)
    )
    predictions = model.scaler.inverse(predict_scaled(model, windows))
    out = config.output_dir / "forecasts.csv"
    with out.open("w") as fh:
        fh.write("target,forecast\n")
        for j, value in enumerate(predictions):
            # prediction j uses windows ending at index need-1+j; target is
            # horizon hours later
            end_index = need - 1 + j
            stamp = window_series.timestamp_at(end_index + model.horizon)
            label = stamp.isoformat() if stamp else str(end_index + model.horizon)
            fh.write(f"{label},{value:.6f}\n")
    print(f"wrote {predictions.shape[0]} forecast(s) to {out}")
    print(f"latest forecast: {predictions[-1]:.4f}")
    return 0


def _cmd_benchmark(config: PipelineConfig) -> int:
    series = config.load_dataset()
    result = run_benchmark(series, config.benchmark_config(len(series)))
    table_csv = config.output_dir / "benchmark.csv"
    table_txt = config.output_dir / "benchmark.txt"
    trace_csv = config.output_dir / "trace.csv"
    write_table_csv(result, table_csv)
    text = format_table_text(result)
    table_txt.write_text(text)
    write_trace_csv(result, trace_csv)
    print(text, end="")
    print(f"wrote {table_csv}, {table_txt}, {trace_csv}")
    failed = [c for c in result.cells if c.error is not None]
    for cell in failed:
        print(f"FAILED cell ({cell.model}, h={cell.horizon}): {cell.error}", file=sys.stderr)
    return 3 if failed else 0


def _cmd_synth(config: PipelineConfig) -> int:
    series = synthetic_prices(config.synthetic_length, config.synthetic_seed)
    out = config.output_dir / "synthetic.csv"
    _write_series_csv(series, out)
    print(f"wrote {len(series)} synthetic samples to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    # Shared flags live on a parent so they work before or after the
    # subcommand; SUPPRESS keeps an unset subparser flag from clobbering one
    # given before the subcommand.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", type=Path, default=argparse.SUPPRESS,
                        help="JSON config file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="override the master seed")
    common.add_argument("--data", default=argparse.SUPPRESS,
                        help="override the input CSV path")
    common.add_argument("--output-dir", default=argparse.SUPPRESS,
                        help="override the output directory")
    common.add_argument("-v", "--verbose", action="store_true",
                        default=argparse.SUPPRESS, help="info-level logging")

    parser = argparse.ArgumentParser(
        prog="pricecast",
        description="Electricity price forecasting pipeline",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("decompose", parents=[common],
                   help="write the mode decomposition as CSV columns")
    sub.add_parser("denoise", parents=[common],
                   help="write the denoise report and denoised series")
    sub.add_parser("train", parents=[common],
                   help="train and persist one model per horizon and cell kind")
    predict = sub.add_parser("predict", parents=[common],
                             help="forecast from a file of recent prices")
    predict.add_argument("--model", required=True, help="path to a saved model (.npz)")
    predict.add_argument("--window-file", required=True, help="CSV of recent prices")
    sub.add_parser("benchmark", parents=[common],
                   help="run the multi-horizon GRU/LSTM comparison")
    sub.add_parser("synth", parents=[common],
                   help="write the bundled synthetic dataset as CSV")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    for name, fallback in (
        ("config", None), ("seed", None), ("data", None),
        ("output_dir", None), ("verbose", False),
    ):
        if not hasattr(args, name):
            setattr(args, name, fallback)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(args.config, args)
        config.output_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "decompose":
            return _cmd_decompose(config)
        if args.command == "denoise":
            return _cmd_denoise(config)
        if args.command == "train":
            return _cmd_train(config)
        if args.command == "predict":
            return _cmd_predict(config, args.model, args.window_file)
        if args.command == "benchmark":
            return _cmd_benchmark(config)
        if args.command == "synth":
            return _cmd_synth(config)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
