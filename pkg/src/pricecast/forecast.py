"""Greedy autoencoder pretraining and recurrent forecaster training.

Each scaled input window is compressed by the encoder stack to a short code;
the recurrent predictor reads the codes of the last ``sequence_length``
consecutive windows and emits the value ``horizon`` hours past the newest
window.  One model is trained per horizon (direct strategy).
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import NumericError
from .nn import Adam, DenseLayer, GruCell, LstmCell, make_cell
from .series import Scaler, WindowedDataset

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1

DEFAULT_LAYER_DIMS = (24, 16, 12, 8)
DEFAULT_HIDDEN_DIM = 32
DEFAULT_SEQUENCE_LENGTH = 8


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 64
    learning_rate: float = 1e-3
    rng_seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    patience: int = 10
    validation_fraction: float = 0.1

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in [0, 1)")

    def hash(self) -> str:
        return hashlib.sha256(
            json.dumps(asdict(self), sort_keys=True).encode()
        ).hexdigest()[:16]


@dataclass
class SaeStack:
    """Encoder/decoder layer stacks; the decoders exist only for training."""

    encoder_layers: tuple[DenseLayer, ...]
    decoder_layers: tuple[DenseLayer, ...]
    layer_dims: tuple[int, ...]

    @property
    def code_dim(self) -> int:
        return self.layer_dims[-1]

    def encode(self, x: np.ndarray) -> np.ndarray:
        for layer in self.encoder_layers:
            x = layer.forward(x)
        return x

    def reconstruction_error(self, x: np.ndarray) -> float:
        """Mean squared error of the full encode/decode round trip."""
        out = self.encode(x)
        for layer in reversed(self.decoder_layers):
            out = layer.forward(out)
        return float(np.mean((out - x) ** 2))


def _validation_split(n: int, fraction: float) -> int:
    """Size of the tail reserved for validation (0 when data is too small)."""
    n_val = int(round(n * fraction))
    if n_val < 1 or n - n_val < 1:
        return 0
    return n_val


def _check_finite(loss: float, context: str) -> None:
    if not np.isfinite(loss):
        raise NumericError(f"{context} diverged: loss is {loss}")


def train_autoencoder_layer(
    data: np.ndarray,
    in_dim: int,
    out_dim: int,
    cfg: TrainConfig,
) -> tuple[DenseLayer, DenseLayer]:
    """Fit one encoder/decoder pair by reconstruction MSE.

    Training is deterministic for a fixed ``cfg.rng_seed``; with
    ``epochs=0`` the freshly initialized pair is returned untouched.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 1:
        raise ValueError("data must be a non-empty (samples, in_dim) array")
    if data.shape[1] != in_dim:
        raise ValueError(f"data has {data.shape[1]} features, expected {in_dim}")
    rng = np.random.Generator(np.random.PCG64(cfg.rng_seed))
    encoder = DenseLayer.initialize(in_dim, out_dim, "sigmoid", rng)
    decoder = DenseLayer.initialize(out_dim, in_dim, "sigmoid", rng)
    if cfg.epochs == 0:
        return encoder, decoder

    n_val = _validation_split(data.shape[0], cfg.validation_fraction)
    train = data[: data.shape[0] - n_val] if n_val else data
    val = data[data.shape[0] - n_val :] if n_val else None

    params = encoder.parameters() + decoder.parameters()
    optimizer = Adam(params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)
    best_val = np.inf
    best_params = None
    stale = 0
    for _epoch in range(cfg.epochs):
        order = rng.permutation(train.shape[0])
        for start in range(0, train.shape[0], cfg.batch_size):
            batch = train[order[start : start + cfg.batch_size]]
            code = encoder.forward(batch)
            recon = decoder.forward(code)
            diff = recon - batch
            loss = float(np.mean(diff * diff))
            _check_finite(loss, "autoencoder layer training")
            grad_recon = 2.0 * diff / diff.size
            grad_code, gw_dec, gb_dec = decoder.backward(code, recon, grad_recon)
            _, gw_enc, gb_enc = encoder.backward(batch, code, grad_code)
            optimizer.step([gw_enc, gb_enc, gw_dec, gb_dec])
        if val is not None:
            recon = decoder.forward(encoder.forward(val))
            val_loss = float(np.mean((recon - val) ** 2))
            _check_finite(val_loss, "autoencoder layer validation")
            if val_loss < best_val:
                best_val = val_loss
                best_params = [p.copy() for p in params]
                stale = 0
            else:
                stale += 1
                if stale >= cfg.patience:
                    break
    if best_params is not None:
        for p, best in zip(params, best_params):
            p[...] = best
    return encoder, decoder


def build_sae(
    train_windows: np.ndarray,
    layer_dims: tuple[int, ...] = DEFAULT_LAYER_DIMS,
    cfg: TrainConfig | None = None,
) -> SaeStack:
    """Greedy layer-wise pretraining: each layer learns to reconstruct the
    codes of the previous one."""
    cfg = cfg or TrainConfig()
    layer_dims = tuple(layer_dims)
    if len(layer_dims) != 4:
        raise ValueError(
            f"layer_dims must have 4 entries (input + 3 hidden), got {len(layer_dims)}"
        )
    data = np.asarray(train_windows, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != layer_dims[0]:
        raise ValueError(
            f"windows of width {data.shape[1] if data.ndim == 2 else '?'} do not "
            f"match input dim {layer_dims[0]}"
        )
    encoders = []
    decoders = []
    for depth, (d_in, d_out) in enumerate(zip(layer_dims[:-1], layer_dims[1:])):
        layer_cfg = TrainConfig(**{**asdict(cfg), "rng_seed": cfg.rng_seed + depth})
        encoder, decoder = train_autoencoder_layer(data, d_in, d_out, layer_cfg)
        encoders.append(encoder)
        decoders.append(decoder)
        data = encoder.forward(data)
    return SaeStack(tuple(encoders), tuple(decoders), layer_dims)


@dataclass
class ForecastModel:
    """Everything needed to turn recent prices into one forecast."""

    sae: SaeStack
    cell: GruCell | LstmCell
    head: DenseLayer
    scaler: Scaler
    window_length: int
    horizon: int
    sequence_length: int
    config_hash: str = ""
    train_losses: tuple[float, ...] = field(default=())

    @property
    def input_length(self) -> int:
        """Samples of history one forecast consumes."""
        return self.window_length + self.sequence_length - 1


def _code_sequences(codes: np.ndarray, sequence_length: int) -> np.ndarray:
    """Stack runs of ``sequence_length`` consecutive codes: (n, S, code_dim)."""
    n = codes.shape[0] - sequence_length + 1
    if n < 1:
        raise ValueError(
            f"need at least {sequence_length} windows to form one sequence, "
            f"got {codes.shape[0]}"
        )
    view = np.lib.stride_tricks.sliding_window_view(
        codes, (sequence_length, codes.shape[1])
    )
    return np.ascontiguousarray(view[:, 0])


def _forward_batch(cell, head: DenseLayer, sequences: np.ndarray):
    h_final, _, cache = cell.forward(sequences)
    pred = head.forward(h_final)[:, 0]
    return pred, h_final, cache


def _predictions(cell, head: DenseLayer, sequences: np.ndarray) -> np.ndarray:
    return _forward_batch(cell, head, sequences)[0]


def train_forecaster(
    features: WindowedDataset,
    cell_kind: str = "gru",
    cfg: TrainConfig | None = None,
    *,
    sae: SaeStack,
    scaler: Scaler,
    hidden_dim: int = DEFAULT_HIDDEN_DIM,
    sequence_length: int = DEFAULT_SEQUENCE_LENGTH,
) -> ForecastModel:
    """Train the recurrent predictor on encoded windows.

    ``features.inputs`` must already be the SAE codes (one per window, in
    chronological order) and targets must be in scaled space.  Training
    minimizes MSE with adaptive-moment updates, early-stops on a validation
    tail, and aborts with NumericError if the loss leaves the reals.
    """
    cfg = cfg or TrainConfig()
    codes = np.asarray(features.inputs, dtype=np.float64)
    if codes.ndim != 2 or codes.shape[0] < 1:
        raise ValueError("features must be a non-empty (windows, code_dim) array")
    if codes.shape[1] != sae.code_dim:
        raise ValueError(
            f"feature dim {codes.shape[1]} does not match encoder output {sae.code_dim}"
        )
    sequences = _code_sequences(codes, sequence_length)
    targets = np.asarray(features.targets, dtype=np.float64)[sequence_length - 1 :]

    rng = np.random.Generator(np.random.PCG64(cfg.rng_seed))
    cell = make_cell(cell_kind, codes.shape[1], hidden_dim, rng)
    head = DenseLayer.initialize(hidden_dim, 1, "identity", rng)

    n = sequences.shape[0]
    n_val = _validation_split(n, cfg.validation_fraction)
    seq_train, y_train = sequences[: n - n_val], targets[: n - n_val]
    seq_val = sequences[n - n_val :] if n_val else None
    y_val = targets[n - n_val :] if n_val else None

    params = cell.parameters() + head.parameters()
    optimizer = Adam(params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)
    losses: list[float] = []
    best_val = np.inf
    best_params = None
    stale = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(seq_train.shape[0])
        epoch_loss = 0.0
        for start in range(0, seq_train.shape[0], cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            batch, y = seq_train[idx], y_train[idx]
            pred, h_final, cache = _forward_batch(cell, head, batch)
            err = pred - y
            loss = float(np.mean(err * err))
            _check_finite(loss, f"{cell.kind} forecaster training")
            epoch_loss += loss * idx.shape[0]

            grad_pred = (2.0 * err / err.shape[0])[:, None]
            grad_h, gw_head, gb_head = head.backward(
                h_final, pred[:, None], grad_pred
            )
            grad_states = np.zeros(
                (batch.shape[0], sequence_length, cell.hidden_dim)
            )
            grad_states[:, -1, :] = grad_h
            cell_grads = cell.backward(cache, grad_states)
            optimizer.step(cell_grads + [gw_head, gb_head])
        losses.append(epoch_loss / seq_train.shape[0])
        if seq_val is not None:
            val_pred = _predictions(cell, head, seq_val)
            val_loss = float(np.mean((val_pred - y_val) ** 2))
            _check_finite(val_loss, f"{cell.kind} forecaster validation")
            if val_loss < best_val:
                best_val = val_loss
                best_params = [p.copy() for p in params]
                stale = 0
            else:
                stale += 1
                if stale >= cfg.patience:
                    logger.info(
                        "%s training stopped early at epoch %d (best val %.3g)",
                        cell.kind, epoch + 1, best_val,
                    )
                    break
    if best_params is not None:
        for p, best in zip(params, best_params):
            p[...] = best
    return ForecastModel(
        sae=sae,
        cell=cell,
        head=head,
        scaler=scaler,
        window_length=features.length,
        horizon=features.horizon,
        sequence_length=sequence_length,
        config_hash=cfg.hash(),
        train_losses=tuple(losses),
    )


def predict_scaled(model: ForecastModel, scaled_windows: np.ndarray) -> np.ndarray:
    """Predictions (scaled space) for consecutive scaled windows.

    ``scaled_windows`` is (n_windows, window_length), chronological; the
    output has ``n_windows - sequence_length + 1`` entries, one per complete
    code sequence.
    """
    codes = model.sae.encode(scaled_windows)
    sequences = _code_sequences(codes, model.sequence_length)
    return _predictions(model.cell, model.head, sequences)


def forecast(model: ForecastModel, recent_values) -> float:
    """One price forecast from the most recent observed prices.

    ``recent_values`` must hold exactly ``model.input_length`` samples in
    original price units (enough to form one code sequence); the return value
    is in price units too.
    """
    recent = np.asarray(recent_values, dtype=np.float64)
    if recent.ndim != 1 or recent.shape[0] != model.input_length:
        raise ValueError(
            f"expected {model.input_length} recent values "
            f"(window {model.window_length} + sequence {model.sequence_length} - 1), "
            f"got {recent.shape}"
        )
    scaled = model.scaler.transform(recent)
    windows = np.lib.stride_tricks.sliding_window_view(scaled, model.window_length)
    prediction = predict_scaled(model, np.ascontiguousarray(windows))
    return float(model.scaler.inverse(prediction)[0])


def _layer_state(prefix: str, layer: DenseLayer, state: dict) -> None:
    state[f"{prefix}_w"] = layer.weights
    state[f"{prefix}_b"] = layer.bias


def save_model(model: ForecastModel, path) -> None:
    """Persist all parameters plus shape metadata as a versioned npz file."""
    state: dict[str, np.ndarray] = {}
    for i, layer in enumerate(model.sae.encoder_layers):
        _layer_state(f"enc{i}", layer, state)
    for i, layer in enumerate(model.sae.decoder_layers):
        _layer_state(f"dec{i}", layer, state)
    for gate in model.cell.w:
        state[f"cell_w_{gate}"] = model.cell.w[gate]
        state[f"cell_u_{gate}"] = model.cell.u[gate]
        state[f"cell_b_{gate}"] = model.cell.b[gate]
    _layer_state("head", model.head, state)
    meta = {
        "format_version": MODEL_FORMAT_VERSION,
        "cell_kind": model.cell.kind,
        "hidden_dim": model.cell.hidden_dim,
        "layer_dims": list(model.sae.layer_dims),
        "window_length": model.window_length,
        "horizon": model.horizon,
        "sequence_length": model.sequence_length,
        "scaler_minimum": model.scaler.minimum,
        "scaler_maximum": model.scaler.maximum,
        "config_hash": model.config_hash,
        "train_losses": list(model.train_losses),
    }
    state["meta"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
    np.savez(path, **state)


def load_model(path) -> ForecastModel:
    """Load a model saved by :func:`save_model`; rejects other versions."""
    with np.load(path) as archive:
        meta = json.loads(bytes(archive["meta"]))
        version = meta.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(
                f"model format version {version} not supported "
                f"(expected {MODEL_FORMAT_VERSION})"
            )
        dims = tuple(meta["layer_dims"])
        encoders = tuple(
            DenseLayer(archive[f"enc{i}_w"], archive[f"enc{i}_b"], "sigmoid")
            for i in range(len(dims) - 1)
        )
        decoders = tuple(
            DenseLayer(archive[f"dec{i}_w"], archive[f"dec{i}_b"], "sigmoid")
            for i in range(len(dims) - 1)
        )
        cell = make_cell(meta["cell_kind"], dims[-1], meta["hidden_dim"])
        for gate in cell.w:
            cell.w[gate] = archive[f"cell_w_{gate}"]
            cell.u[gate] = archive[f"cell_u_{gate}"]
            cell.b[gate] = archive[f"cell_b_{gate}"]
        head = DenseLayer(archive["head_w"], archive["head_b"], "identity")
    return ForecastModel(
        sae=SaeStack(encoders, decoders, dims),
        cell=cell,
        head=head,
        scaler=Scaler(meta["scaler_minimum"], meta["scaler_maximum"]),
        window_length=meta["window_length"],
        horizon=meta["horizon"],
        sequence_length=meta["sequence_length"],
        config_hash=meta["config_hash"],
        train_losses=tuple(meta["train_losses"]),
    )
