import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pricecast.entropy import PeConfig, permutation_entropy


def test_monotone_is_exactly_zero():
    x = np.arange(1, 101, dtype=float)
    assert permutation_entropy(x, PeConfig(embedding_dim=4)) == 0.0


def test_alternating_series_m2():
    # 500 ups and 499 downs over 999 windows: entropy/ln2 ~ 0.9999993
    x = np.tile([1.0, 2.0], 500)
    pe = permutation_entropy(x, PeConfig(embedding_dim=2))
    assert pe > 0.9999
    counts = np.array([500, 499]) / 999
    expected = -np.sum(counts * np.log(counts)) / math.log(2)
    assert pe == pytest.approx(expected, abs=1e-12)


def test_white_noise_near_one():
    rng = np.random.Generator(np.random.PCG64(8))
    x = rng.standard_normal(10000)
    assert permutation_entropy(x, PeConfig(embedding_dim=4)) > 0.95


def test_bounds_on_mixed_signals():
    rng = np.random.Generator(np.random.PCG64(9))
    mixes = [
        np.sin(np.arange(500) / 3.0),
        rng.standard_normal(500),
        np.sin(np.arange(500) / 5.0) + 0.2 * rng.standard_normal(500),
    ]
    for x in mixes:
        pe = permutation_entropy(x)
        assert 0.0 <= pe <= 1.0


def test_unnormalized_scale():
    rng = np.random.Generator(np.random.PCG64(10))
    x = rng.standard_normal(5000)
    raw = permutation_entropy(x, PeConfig(embedding_dim=3, normalize=False))
    norm = permutation_entropy(x, PeConfig(embedding_dim=3, normalize=True))
    assert raw == pytest.approx(norm * math.log(math.factorial(3)))


def test_too_short_errors():
    with pytest.raises(ValueError, match="too short"):
        permutation_entropy(np.arange(4, dtype=float), PeConfig(embedding_dim=4))


def test_delay_shortens_usable_windows():
    x = np.arange(20, dtype=float)
    assert permutation_entropy(x, PeConfig(embedding_dim=3, delay=2)) == 0.0
    with pytest.raises(ValueError, match="too short"):
        permutation_entropy(np.arange(6, dtype=float), PeConfig(embedding_dim=3, delay=2))


def test_ties_rank_by_earlier_index():
    # all-equal windows form a single "ascending" pattern, same as monotone
    flat = np.full(50, 2.0)
    ramp = np.arange(50, dtype=float)
    cfg = PeConfig(embedding_dim=3)
    assert permutation_entropy(flat, cfg) == permutation_entropy(ramp, cfg) == 0.0


def test_config_validation():
    with pytest.raises(ValueError, match="embedding_dim"):
        PeConfig(embedding_dim=1)
    with pytest.raises(ValueError, match="embedding_dim"):
        PeConfig(embedding_dim=8)
    with pytest.raises(ValueError, match="delay"):
        PeConfig(delay=0)


@given(
    values=st.lists(st.integers(-50, 50), min_size=10, max_size=80),
    transform=st.sampled_from(
        [
            lambda v: v**3,
            lambda v: 2.0 * v + 1.0,
            lambda v: np.arctan(v / 10.0),
            lambda v: np.exp(v / 25.0),
        ]
    ),
)
@settings(max_examples=100)
def test_invariant_under_increasing_transforms(values, transform):
    x = np.array(values, dtype=np.float64)
    cfg = PeConfig(embedding_dim=3)
    assert permutation_entropy(x, cfg) == permutation_entropy(transform(x), cfg)
