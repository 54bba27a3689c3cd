import numpy as np
import pytest

from pricecast.errors import NumericError
from pricecast.forecast import (
    ForecastModel,
    SaeStack,
    TrainConfig,
    build_sae,
    forecast,
    load_model,
    predict_scaled,
    save_model,
    train_autoencoder_layer,
    train_forecaster,
)
from pricecast.nn import DenseLayer
from pricecast.series import TimeSeries, WindowedDataset, fit_scale, make_windows


@pytest.fixture(scope="module")
def toy_pipeline():
    """Linear ramp series, scaled and windowed, with a trained encoder."""
    series = TimeSeries(0.01 * np.arange(600))
    scaled, scaler = fit_scale(series)
    windows = make_windows(scaled, 24, 3)
    sae = build_sae(windows.inputs, (24, 16, 12, 8), TrainConfig(epochs=60, rng_seed=7))
    features = WindowedDataset(
        sae.encode(windows.inputs), windows.targets, windows.length, windows.horizon
    )
    return series, scaler, windows, sae, features


class TestAutoencoderLayer:
    def test_memorizes_a_single_vector(self):
        rng = np.random.default_rng(0)
        vector = rng.uniform(0.2, 0.8, size=8)
        data = np.tile(vector, (16, 1))
        cfg = TrainConfig(epochs=400, batch_size=16, learning_rate=3e-3,
                          rng_seed=1, validation_fraction=0.0)
        encoder, decoder = train_autoencoder_layer(data, 8, 4, cfg)
        recon = decoder.forward(encoder.forward(data))
        assert float(np.mean((recon - data) ** 2)) < 1e-3

    def test_zero_epochs_returns_initialization(self):
        rng = np.random.default_rng(2)
        data = rng.uniform(size=(32, 6))
        cfg = TrainConfig(epochs=0, rng_seed=3)
        encoder, decoder = train_autoencoder_layer(data, 6, 3, cfg)
        fresh_rng = np.random.Generator(np.random.PCG64(3))
        expected_enc = DenseLayer.initialize(6, 3, "sigmoid", fresh_rng)
        expected_dec = DenseLayer.initialize(3, 6, "sigmoid", fresh_rng)
        assert np.array_equal(encoder.weights, expected_enc.weights)
        assert np.array_equal(decoder.weights, expected_dec.weights)

    def test_loss_decreases_from_first_epoch(self):
        rng = np.random.default_rng(4)
        data = rng.uniform(size=(64, 10))
        untrained_enc, untrained_dec = train_autoencoder_layer(
            data, 10, 5, TrainConfig(epochs=0, rng_seed=5)
        )
        before = float(np.mean(
            (untrained_dec.forward(untrained_enc.forward(data)) - data) ** 2
        ))
        enc, dec = train_autoencoder_layer(data, 10, 5, TrainConfig(epochs=50, rng_seed=5))
        after = float(np.mean((dec.forward(enc.forward(data)) - data) ** 2))
        assert after <= before

    def test_rejects_empty_and_mismatched_data(self):
        cfg = TrainConfig(epochs=1)
        with pytest.raises(ValueError, match="non-empty"):
            train_autoencoder_layer(np.empty((0, 4)), 4, 2, cfg)
        with pytest.raises(ValueError, match="features"):
            train_autoencoder_layer(np.zeros((8, 5)), 4, 2, cfg)


class TestBuildSae:
    def test_improves_over_untrained_stack(self, toy_pipeline):
        _, _, windows, sae, _ = toy_pipeline
        untrained = build_sae(windows.inputs, (24, 16, 12, 8),
                              TrainConfig(epochs=0, rng_seed=7))
        assert sae.reconstruction_error(windows.inputs) < untrained.reconstruction_error(
            windows.inputs
        )

    def test_dims_contract(self):
        with pytest.raises(ValueError, match="4 entries"):
            build_sae(np.zeros((10, 24)), (24, 16, 12), TrainConfig(epochs=0))

    def test_zero_stack_encodes_to_half(self):
        dims = (6, 4, 3, 2)
        layers = tuple(
            DenseLayer(np.zeros((o, i)), np.zeros(o), "sigmoid")
            for i, o in zip(dims[:-1], dims[1:])
        )
        stack = SaeStack(layers, layers[::-1], dims)
        assert np.allclose(stack.encode(np.zeros(6)), 0.5)

    def test_code_dimension(self, toy_pipeline):
        _, _, windows, sae, features = toy_pipeline
        assert sae.code_dim == 8
        assert features.inputs.shape == (len(windows), 8)


class TestTrainForecaster:
    def test_learns_linear_toy(self, toy_pipeline):
        _, scaler, _, sae, features = toy_pipeline
        model = train_forecaster(
            features, "gru",
            TrainConfig(epochs=200, rng_seed=7, validation_fraction=0.0),
            sae=sae, scaler=scaler,
        )
        assert np.sqrt(model.train_losses[-1]) < 0.05

    def test_loss_non_increasing_with_spike_tolerance(self, toy_pipeline):
        _, scaler, _, sae, features = toy_pipeline
        model = train_forecaster(
            features, "gru",
            TrainConfig(epochs=200, rng_seed=7, validation_fraction=0.0),
            sae=sae, scaler=scaler,
        )
        losses = model.train_losses
        assert losses[-1] < losses[0]
        running_min = losses[0]
        for loss in losses[1:]:
            assert loss <= 1.05 * running_min + 1e-3
            running_min = min(running_min, loss)

    def test_deterministic(self, toy_pipeline):
        _, scaler, _, sae, features = toy_pipeline
        cfg = TrainConfig(epochs=15, rng_seed=11)
        a = train_forecaster(features, "gru", cfg, sae=sae, scaler=scaler)
        b = train_forecaster(features, "gru", cfg, sae=sae, scaler=scaler)
        for pa, pb in zip(
            a.cell.parameters() + a.head.parameters(),
            b.cell.parameters() + b.head.parameters(),
        ):
            assert np.array_equal(pa, pb)

    def test_lstm_variant_trains(self, toy_pipeline):
        _, scaler, _, sae, features = toy_pipeline
        model = train_forecaster(
            features, "lstm", TrainConfig(epochs=5, rng_seed=12), sae=sae, scaler=scaler
        )
        assert model.cell.kind == "lstm"
        assert len(model.train_losses) >= 1

    @pytest.mark.filterwarnings("ignore:overflow")
    def test_divergence_aborts_with_numeric_error(self, toy_pipeline):
        _, scaler, _, sae, features = toy_pipeline
        with pytest.raises(NumericError, match="diverged"):
            train_forecaster(
                features, "gru",
                TrainConfig(epochs=50, learning_rate=1e200, rng_seed=13,
                            validation_fraction=0.0),
                sae=sae, scaler=scaler,
            )


@pytest.fixture(scope="module")
def model(toy_pipeline):
    _, scaler, _, sae, features = toy_pipeline
    return train_forecaster(
        features, "gru", TrainConfig(epochs=30, rng_seed=14), sae=sae, scaler=scaler
    )


class TestForecast:
    def test_receptive_field(self, model):
        assert model.input_length == 24 + 8 - 1

    def test_wrong_window_length_rejected(self, model):
        with pytest.raises(ValueError, match="expected 31 recent values"):
            forecast(model, np.zeros(24))

    def test_deterministic_and_finite(self, model, toy_pipeline):
        series = toy_pipeline[0]
        recent = series.values[-model.input_length :]
        first = forecast(model, recent)
        second = forecast(model, recent)
        assert first == second
        assert np.isfinite(first)

    def test_batch_prediction_alignment(self, model, toy_pipeline):
        series, scaler = toy_pipeline[0], toy_pipeline[1]
        scaled = scaler.transform(series.values[-40:])
        windows = np.ascontiguousarray(
            np.lib.stride_tricks.sliding_window_view(scaled, 24)
        )
        batch = predict_scaled(model, windows)
        assert batch.shape == (windows.shape[0] - model.sequence_length + 1,)
        single = forecast(model, series.values[-model.input_length :])
        assert single == pytest.approx(float(model.scaler.inverse(batch[-1:])[0]))


class TestPersistence:
    def test_round_trip(self, toy_pipeline, tmp_path):
        series, scaler, _, sae, features = toy_pipeline
        model = train_forecaster(
            features, "gru", TrainConfig(epochs=10, rng_seed=15), sae=sae, scaler=scaler
        )
        path = tmp_path / "model.npz"
        save_model(model, path)
        loaded = load_model(path)
        recent = series.values[-model.input_length :]
        assert forecast(loaded, recent) == forecast(model, recent)
        assert loaded.horizon == model.horizon
        assert loaded.config_hash == model.config_hash

    def test_version_mismatch_rejected(self, toy_pipeline, tmp_path):
        import json

        series, scaler, _, sae, features = toy_pipeline
        model = train_forecaster(
            features, "gru", TrainConfig(epochs=1, rng_seed=16), sae=sae, scaler=scaler
        )
        path = tmp_path / "model.npz"
        save_model(model, path)
        with np.load(path) as archive:
            state = {k: archive[k] for k in archive.files}
        meta = json.loads(bytes(state["meta"]))
        meta["format_version"] = 999
        state["meta"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
        np.savez(path, **state)
        with pytest.raises(ValueError, match="version"):
            load_model(path)


def test_train_config_validation():
    with pytest.raises(ValueError, match="learning_rate"):
        TrainConfig(learning_rate=-1.0)
    with pytest.raises(ValueError, match="epochs"):
        TrainConfig(epochs=-1)
    with pytest.raises(ValueError, match="batch_size"):
        TrainConfig(batch_size=0)
