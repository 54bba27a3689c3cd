"""Multi-horizon benchmark: GRU vs LSTM over the full pipeline.

For each horizon the training split is denoised, scaled, windowed, and
encoded once; each cell kind then trains its own predictor on the shared
features.  Scoring is always against the raw (un-denoised) test prices in
original units.  Every seed is derived from the master seed, so a rerun with
the same config reproduces the table byte for byte.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np

from .denoise import DEFAULT_PE_THRESHOLD, denoise_series
from .emd import CeemdanConfig
from .entropy import PeConfig
from .forecast import (
    DEFAULT_HIDDEN_DIM,
    DEFAULT_LAYER_DIMS,
    DEFAULT_SEQUENCE_LENGTH,
    TrainConfig,
    build_sae,
    predict_scaled,
    train_forecaster,
)
from .metrics import MetricReport, evaluate
from .series import TimeSeries, WindowedDataset, fit_scale, make_windows, split

logger = logging.getLogger(__name__)

DEFAULT_HORIZONS = (3, 6, 9, 12)
DEFAULT_CELL_KINDS = ("gru", "lstm")

_CELL_SEED_OFFSET = {"gru": 1, "lstm": 2}


@dataclass(frozen=True)
class BenchmarkConfig:
    n_train: int = 28032
    n_test: int = 7008
    window_length: int = 24
    horizons: tuple[int, ...] = DEFAULT_HORIZONS
    cell_kinds: tuple[str, ...] = DEFAULT_CELL_KINDS
    ceemdan: CeemdanConfig = field(default_factory=CeemdanConfig)
    pe: PeConfig = field(default_factory=PeConfig)
    pe_threshold: float = DEFAULT_PE_THRESHOLD
    layer_dims: tuple[int, ...] = DEFAULT_LAYER_DIMS
    hidden_dim: int = DEFAULT_HIDDEN_DIM
    sequence_length: int = DEFAULT_SEQUENCE_LENGTH
    train: TrainConfig = field(default_factory=TrainConfig)
    master_seed: int = 0
    trace_horizon: int = 3
    trace_length: int = 288


@dataclass(frozen=True)
class BenchmarkCell:
    """One (model, horizon) outcome; ``error`` is set when the cell failed."""

    model: str
    horizon: int
    report: MetricReport | None = None
    error: str | None = None


@dataclass(frozen=True)
class TraceRow:
    timestamp: str
    actual: float
    predicted: dict[str, float]


@dataclass(frozen=True)
class BenchmarkResult:
    cells: tuple[BenchmarkCell, ...]
    trace: tuple[TraceRow, ...]
    cell_kinds: tuple[str, ...]
    horizons: tuple[int, ...]

    def cell(self, model: str, horizon: int) -> BenchmarkCell | None:
        for c in self.cells:
            if c.model == model and c.horizon == horizon:
                return c
        return None


def run_benchmark(dataset: TimeSeries, config: BenchmarkConfig | None = None) -> BenchmarkResult:
    """Run the full pipeline for every (cell kind, horizon) pair.

    A failing cell is recorded with its error message instead of aborting the
    remaining cells.
    """
    config = config or BenchmarkConfig()
    train_raw, test_raw = split(dataset, config.n_train, config.n_test)

    ceemdan = dataclasses.replace(config.ceemdan, rng_seed=config.master_seed)
    logger.info("denoising training split (%d samples)", len(train_raw))
    train_dn, _ = denoise_series(train_raw, ceemdan, config.pe, config.pe_threshold)
    logger.info("denoising test split (%d samples)", len(test_raw))
    test_dn, _ = denoise_series(test_raw, ceemdan, config.pe, config.pe_threshold)

    train_scaled, scaler = fit_scale(train_dn)
    test_scaled = test_dn.replace_values(scaler.transform(test_dn.values))

    seq_len = config.sequence_length
    cells: list[BenchmarkCell] = []
    trace: tuple[TraceRow, ...] = ()
    for horizon in config.horizons:
        try:
            windows = make_windows(train_scaled, config.window_length, horizon)
            sae_cfg = dataclasses.replace(
                config.train, rng_seed=config.master_seed + 100 + horizon
            )
            sae = build_sae(windows.inputs, config.layer_dims, sae_cfg)
            features = WindowedDataset(
                sae.encode(windows.inputs), windows.targets, windows.length, windows.horizon
            )
            test_windows = make_windows(test_scaled, config.window_length, horizon)
            raw_targets = make_windows(test_raw, config.window_length, horizon).targets
            actual = raw_targets[seq_len - 1 :]
        except Exception as exc:  # mark the whole horizon, keep the others
            logger.error("horizon %d failed before training: %s", horizon, exc)
            for kind in config.cell_kinds:
                cells.append(BenchmarkCell(model=kind, horizon=horizon, error=str(exc)))
            continue

        predictions: dict[str, np.ndarray] = {}
        for kind in config.cell_kinds:
            train_cfg = dataclasses.replace(
                config.train,
                rng_seed=config.master_seed
                + 1000 * horizon
                + _CELL_SEED_OFFSET.get(kind, 9),
            )
            try:
                model = train_forecaster(
                    features,
                    kind,
                    train_cfg,
                    sae=sae,
                    scaler=scaler,
                    hidden_dim=config.hidden_dim,
                    sequence_length=seq_len,
                )
                predicted = scaler.inverse(predict_scaled(model, test_windows.inputs))
                report = evaluate(kind, horizon, actual, predicted)
                cells.append(BenchmarkCell(model=kind, horizon=horizon, report=report))
                predictions[kind] = predicted
                logger.info(
                    "%s h=%d: rmse %.4f mae %.4f over %d samples",
                    kind, horizon, report.rmse, report.mae, report.n_samples,
                )
            except Exception as exc:  # keep the remaining cells running
                logger.error("cell (%s, h=%d) failed: %s", kind, horizon, exc)
                cells.append(BenchmarkCell(model=kind, horizon=horizon, error=str(exc)))

        if horizon == config.trace_horizon and predictions:
            trace = _build_trace(
                test_raw, actual, predictions, config, horizon, seq_len
            )
    return BenchmarkResult(
        cells=tuple(cells),
        trace=trace,
        cell_kinds=config.cell_kinds,
        horizons=config.horizons,
    )


def _build_trace(
    test_raw: TimeSeries,
    actual: np.ndarray,
    predictions: dict[str, np.ndarray],
    config: BenchmarkConfig,
    horizon: int,
    seq_len: int,
) -> tuple[TraceRow, ...]:
    count = min(config.trace_length, actual.shape[0])
    rows = []
    for j in range(count):
        target_index = (seq_len - 1 + j) + config.window_length + horizon - 1
        stamp = test_raw.timestamp_at(target_index)
        rows.append(
            TraceRow(
                timestamp=stamp.isoformat() if stamp else str(target_index),
                actual=float(actual[j]),
                predicted={kind: float(vals[j]) for kind, vals in predictions.items()},
            )
        )
    return tuple(rows)


def _cell_text(cell: BenchmarkCell | None, metric: str) -> str:
    if cell is None or cell.report is None:
        return "FAILED"
    return f"{getattr(cell.report, metric):.4f}"


def write_table_csv(result: BenchmarkResult, path) -> None:
    """One row per (model, metric), one column per horizon."""
    with open(path, "w") as fh:
        header = ",".join(["model", "metric"] + [f"h{h}" for h in result.horizons])
        fh.write(header + "\n")
        for kind in result.cell_kinds:
            for metric in ("rmse", "mae"):
                values = [
                    _cell_text(result.cell(kind, h), metric) for h in result.horizons
                ]
                fh.write(",".join([kind, metric] + values) + "\n")


def format_table_text(result: BenchmarkResult) -> str:
    """Aligned plain-text table mirroring the CSV layout."""
    width = 10
    lines = [
        "model  metric" + "".join(f"{f'h={h}':>{width}}" for h in result.horizons)
    ]
    for kind in result.cell_kinds:
        for metric in ("rmse", "mae"):
            cells = "".join(
                f"{_cell_text(result.cell(kind, h), metric):>{width}}"
                for h in result.horizons
            )
            lines.append(f"{kind:<6} {metric:<6}" + cells)
    return "\n".join(lines) + "\n"


def write_trace_csv(result: BenchmarkResult, path) -> None:
    """Prediction trace: ``timestamp,actual,predicted_gru,predicted_lstm``."""
    with open(path, "w") as fh:
        fh.write("timestamp,actual,predicted_gru,predicted_lstm\n")
        for row in result.trace:
            gru = row.predicted.get("gru")
            lstm = row.predicted.get("lstm")
            fh.write(
                ",".join(
                    [
                        row.timestamp,
                        f"{row.actual:.6f}",
                        "" if gru is None else f"{gru:.6f}",
                        "" if lstm is None else f"{lstm:.6f}",
                    ]
                )
                + "\n"
            )
