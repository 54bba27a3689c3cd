"""Empirical mode decomposition and its noise-assisted ensemble variant.

``sift_imf`` peels one oscillatory mode off a signal; ``emd_decompose``
iterates it until the remainder is monotone.  ``ceemdan_decompose`` averages
first modes over an ensemble of noise-perturbed copies, injecting the
stage-matched mode of each noise realization so the ensemble cancels instead
of leaking residual noise into the result.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .backend import count_zero_crossings, envelope_mean, local_extrema

logger = logging.getLogger(__name__)

MIN_SIGNAL_LENGTH = 8


class MonotoneComponentError(ValueError):
    """Raised when a signal has too few extrema to fit an envelope pair."""


@dataclass(frozen=True)
class SiftSettings:
    """Stopping controls for the inner sift loop.

    The loop stops when consecutive candidates differ by less than
    ``sd_threshold`` in relative energy (Cauchy criterion), or earlier when
    the candidate already looks like a mode: extrema and zero-crossing counts
    within one of each other and a mean envelope below
    ``envelope_tolerance`` times the std of the sift input.
    """

    sd_threshold: float = 0.2
    max_iterations: int = 50
    envelope_tolerance: float = 0.05

    def __post_init__(self):
        if self.sd_threshold <= 0:
            raise ValueError("sd_threshold must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class Imf:
    """One extracted mode; ``index`` is the 1-based ordinal (1 = fastest)."""

    values: np.ndarray
    index: int


@dataclass(frozen=True)
class Decomposition:
    imfs: tuple[Imf, ...]
    residue: np.ndarray

    def __len__(self) -> int:
        return len(self.imfs)

    def reconstruct(self) -> np.ndarray:
        """Sum of all modes plus the residue."""
        total = self.residue.copy()
        for imf in self.imfs:
            total += imf.values
        return total

    def imf_matrix(self) -> np.ndarray:
        """Modes stacked as rows, shape (n_imfs, n_samples)."""
        if not self.imfs:
            return np.empty((0, self.residue.shape[0]))
        return np.stack([imf.values for imf in self.imfs])


@dataclass(frozen=True)
class CeemdanConfig:
    """Ensemble decomposition controls.

    ``noise_scale`` is dimensionless: the injected noise amplitude is
    ``noise_scale * std(residue)`` at every stage (``std(signal)`` at the
    first).  ``max_imfs=None`` means the dyadic default ``floor(log2 n) - 1``.
    Noise realization ``i`` draws from a PCG64 stream seeded ``rng_seed + i``,
    so results do not depend on execution order.
    """

    ensemble_size: int = 100
    noise_scale: float = 0.2
    rng_seed: int = 0
    max_imfs: int | None = None
    sift: SiftSettings = field(default_factory=SiftSettings)

    def __post_init__(self):
        if self.ensemble_size < 1:
            raise ValueError("ensemble_size must be >= 1")
        if self.noise_scale <= 0:
            raise ValueError("noise_scale must be > 0")
        if self.max_imfs is not None and self.max_imfs < 1:
            raise ValueError("max_imfs must be >= 1")


def default_max_imfs(n_samples: int) -> int:
    """Dyadic-filter-bank cap on the number of extractable modes."""
    return max(1, int(math.floor(math.log2(n_samples))) - 1)


def _as_signal(values, min_length: int = 1) -> np.ndarray:
    x = np.ascontiguousarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D signal, got shape {x.shape}")
    if x.shape[0] < min_length:
        raise ValueError(f"signal too short: {x.shape[0]} < {min_length} samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains NaN or infinite values")
    return x


def _is_siftable(x: np.ndarray) -> bool:
    max_idx, min_idx = local_extrema(x)
    return max_idx.shape[0] >= 2 and min_idx.shape[0] >= 2


def sift_imf(signal, settings: SiftSettings | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Extract the fastest mode of ``signal``.

    Returns ``(imf, remainder)`` with ``imf + remainder`` reproducing the
    input to rounding.  Raises MonotoneComponentError when the signal has
    fewer than two maxima or two minima; callers treat such a signal as a
    residue.
    """
    settings = settings or SiftSettings()
    x = _as_signal(signal)
    sigma = float(np.std(x))
    h = x.copy()
    for iteration in range(settings.max_iterations):
        env, n_max, n_min = envelope_mean(h)
        if env is None:
            if iteration == 0:
                raise MonotoneComponentError(
                    f"monotone component: {n_max} maxima / {n_min} minima"
                )
            break
        n_ext = n_max + n_min
        if (
            abs(n_ext - count_zero_crossings(h)) <= 1
            and float(np.max(np.abs(env))) < settings.envelope_tolerance * sigma
        ):
            break
        energy = float(np.dot(h, h))
        if energy == 0.0:
            break
        sd = float(np.dot(env, env)) / energy
        h = h - env
        if sd < settings.sd_threshold:
            break
    return h, x - h


def emd_decompose(
    signal,
    max_imfs: int | None = None,
    settings: SiftSettings | None = None,
) -> Decomposition:
    """Plain EMD: sift successive remainders until one is monotone.

    A signal with no extractable mode (constant, ramp) yields zero modes and
    ``residue == signal``.
    """
    x = _as_signal(signal, MIN_SIGNAL_LENGTH)
    if max_imfs is None:
        max_imfs = default_max_imfs(x.shape[0])
    imfs: list[Imf] = []
    residue = x
    while len(imfs) < max_imfs:
        try:
            mode, residue = sift_imf(residue, settings)
        except MonotoneComponentError:
            break
        imfs.append(Imf(values=mode, index=len(imfs) + 1))
    return Decomposition(imfs=tuple(imfs), residue=residue)


def _first_mode(signal: np.ndarray, settings: SiftSettings, context: str) -> np.ndarray:
    try:
        mode, _ = sift_imf(signal, settings)
        return mode
    except MonotoneComponentError:
        logger.warning("%s yielded no mode; using the unmodified input", context)
        return signal


def ceemdan_decompose(signal, config: CeemdanConfig | None = None) -> Decomposition:
    """Ensemble decomposition with stage-adaptive noise.

    Stage 1 averages the first modes of ``signal + eps0 * w_i`` over the
    ensemble; stage k+1 perturbs the running residue with the k-th mode of
    each noise realization, scaled to the residue's std.  Stops once the
    residue has too few extrema to sift or the mode cap is reached.
    Deterministic for a fixed ``rng_seed``.
    """
    config = config or CeemdanConfig()
    x = _as_signal(signal, MIN_SIGNAL_LENGTH)
    n = x.shape[0]
    size = config.ensemble_size
    max_imfs = config.max_imfs if config.max_imfs is not None else default_max_imfs(n)

    if not _is_siftable(x):
        return Decomposition(imfs=(), residue=x)

    noise = np.empty((size, n))
    for i in range(size):
        rng = np.random.Generator(np.random.PCG64(config.rng_seed + i))
        noise[i] = rng.standard_normal(n)
    # Each realization's full mode set is computed once; stage k reuses mode k.
    noise_modes = [emd_decompose(noise[i], max_imfs, config.sift) for i in range(size)]

    imfs: list[Imf] = []
    residue = x
    modes = np.empty((size, n))
    while len(imfs) < max_imfs and _is_siftable(residue):
        stage = len(imfs)
        amplitude = config.noise_scale * float(np.std(residue if stage else x))
        for i in range(size):
            if stage == 0:
                perturbed = x + amplitude * noise[i]
            elif stage - 1 < len(noise_modes[i].imfs):
                perturbed = residue + amplitude * noise_modes[i].imfs[stage - 1].values
            else:
                # This realization has no mode at this depth; decompose the
                # residue unperturbed rather than dropping the realization.
                perturbed = residue
            modes[i] = _first_mode(
                perturbed, config.sift, f"stage {stage + 1} realization {i}"
            )
        mode = modes.mean(axis=0)
        imfs.append(Imf(values=mode, index=stage + 1))
        residue = residue - mode
    return Decomposition(imfs=tuple(imfs), residue=residue)


def dump_decomposition(decomp: Decomposition, path) -> None:
    """Write modes and residue as columns of a comma-separated text file."""
    columns = [imf.values for imf in decomp.imfs] + [decomp.residue]
    names = [f"imf{k + 1}" for k in range(len(decomp.imfs))] + ["residue"]
    np.savetxt(
        path,
        np.column_stack(columns),
        fmt="%.12g",
        delimiter=",",
        header=",".join(names),
        comments="",
    )
