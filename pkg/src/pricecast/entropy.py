"""Permutation entropy: ordinal-pattern complexity of a series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PeConfig:
    """Ordinal-pattern parameters.

    With ``normalize`` the entropy is divided by ln(embedding_dim!) so it
    lands in [0, 1] regardless of the embedding.
    """

    embedding_dim: int = 4
    delay: int = 1
    normalize: bool = True

    def __post_init__(self):
        if not 2 <= self.embedding_dim <= 7:
            raise ValueError("embedding_dim must be in [2, 7]")
        if self.delay < 1:
            raise ValueError("delay must be >= 1")


def permutation_entropy(signal, config: PeConfig | None = None) -> float:
    """Shannon entropy of the ordinal-pattern distribution of ``signal``.

    Every length-``m`` window (stride 1, element spacing ``delay``) is mapped
    to the permutation that sorts it; ties rank by earlier index.  Monotone
    input gives exactly 0; an i.i.d. sequence approaches 1 when normalized.
    """
    config = config or PeConfig()
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D signal, got shape {x.shape}")
    m, tau = config.embedding_dim, config.delay
    if x.shape[0] < m * tau + 1:
        raise ValueError(
            f"signal too short for permutation entropy: need at least "
            f"{m * tau + 1} samples, got {x.shape[0]}"
        )
    n_windows = x.shape[0] - (m - 1) * tau
    offsets = np.arange(m) * tau
    windows = x[np.arange(n_windows)[:, None] + offsets[None, :]]
    patterns = np.argsort(windows, axis=1, kind="stable")
    codes = patterns @ (m ** np.arange(m))
    _, counts = np.unique(codes, return_counts=True)
    probabilities = counts / n_windows
    # + 0.0 turns the -0.0 of a single-pattern input into a plain 0.0
    entropy = float(-np.sum(probabilities * np.log(probabilities))) + 0.0
    if config.normalize:
        entropy /= math.log(math.factorial(m))
    return entropy
