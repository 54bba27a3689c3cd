"""Entropy-guided denoising: classify modes as noisy or clean, shrink the
noisy ones with an index-adaptive soft threshold, and rebuild the series.

Modes come out of the decomposition fastest first, so the noisy ones form a
prefix: the partition point is the first mode whose permutation entropy
drops below the threshold, and everything before it gets thresholded.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .emd import CeemdanConfig, Decomposition, Imf, ceemdan_decompose
from .entropy import PeConfig, permutation_entropy
from .series import TimeSeries

logger = logging.getLogger(__name__)

DEFAULT_PE_THRESHOLD = 0.7

MAD_TO_SIGMA = 0.6745  # MAD of a standard normal


@dataclass(frozen=True)
class DenoiseReport:
    """Per-mode entropies, the noisy/clean partition point (1-based; 1 means
    nothing was noisy, n_imfs+1 means everything was), the thresholds applied
    to the noisy prefix, and the reconstructed series."""

    pe_values: tuple[float, ...]
    partition: int
    lambdas: tuple[float, ...]
    denoised: TimeSeries


def first_crossing_partition(
    pe_values: tuple[float, ...] | list[float], pe_threshold: float
) -> int:
    """1-based index of the first entropy below the threshold.

    Everything before it counts as noisy; a later value re-exceeding the
    threshold does not move the partition (single separation point) and is
    logged instead.
    """
    partition = len(pe_values) + 1
    for k, pe in enumerate(pe_values, start=1):
        if pe < pe_threshold:
            partition = k
            break
    for k in range(partition, len(pe_values)):
        if pe_values[k] >= pe_threshold:
            logger.warning(
                "mode %d has entropy %.3f above threshold %.2f past the "
                "partition at %d; keeping the contiguous split",
                k + 1, pe_values[k], pe_threshold, partition,
            )
    return partition


def partition_imfs(
    decomp: Decomposition,
    pe_config: PeConfig | None = None,
    pe_threshold: float = DEFAULT_PE_THRESHOLD,
) -> tuple[int, tuple[float, ...]]:
    """First-crossing split of modes into a noisy prefix and a clean tail."""
    if not decomp.imfs:
        raise ValueError("decomposition has no modes to partition")
    pe_values = tuple(
        permutation_entropy(imf.values, pe_config) for imf in decomp.imfs
    )
    return first_crossing_partition(pe_values, pe_threshold), pe_values


def threshold_scale(sigma: float, series_length: int, imf_index: int) -> float:
    """Shrinkage amount: sigma * sqrt(2 ln(length) / ln(index + 1))."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if series_length < 2 or imf_index < 1:
        raise ValueError("need series_length >= 2 and imf_index >= 1")
    return sigma * float(np.sqrt(2.0 * np.log(series_length) / np.log(imf_index + 1)))


def adaptive_lambda(imf: Imf, series_length: int) -> float:
    """Threshold for one mode, with sigma estimated robustly from the mode.

    Uses the median-absolute-deviation estimate so the oscillatory part of
    the mode does not inflate the noise scale.  A flat mode gets 0, making
    thresholding a no-op.
    """
    deviation = np.abs(imf.values - np.median(imf.values))
    sigma = float(np.median(deviation)) / MAD_TO_SIGMA
    if sigma == 0.0:
        return 0.0
    return threshold_scale(sigma, series_length, imf.index)


def soft_threshold(imf: Imf, lam: float) -> Imf:
    """Shrink each value toward zero by ``lam``; values inside die to 0."""
    if lam < 0:
        raise ValueError("threshold must be >= 0")
    w = imf.values
    shrunk = np.where(np.abs(w) >= lam, np.sign(w) * (np.abs(w) - lam), 0.0)
    return Imf(values=shrunk, index=imf.index)


def reconstruct(
    decomp: Decomposition,
    partition: int,
    denoised_noisy_imfs: list[Imf] | tuple[Imf, ...],
) -> np.ndarray:
    """Replace modes below the partition with their denoised versions and sum.

    ``denoised_noisy_imfs`` must hold exactly the modes with index
    1..partition-1, in order.
    """
    expected = list(range(1, partition))
    got = [imf.index for imf in denoised_noisy_imfs]
    if got != expected:
        raise ValueError(
            f"denoised modes {got} do not match the noisy prefix {expected}"
        )
    total = decomp.residue.copy()
    for imf in denoised_noisy_imfs:
        total += imf.values
    for imf in decomp.imfs[partition - 1 :]:
        total += imf.values
    return total


def denoise_series(
    series: TimeSeries,
    ceemdan_config: CeemdanConfig | None = None,
    pe_config: PeConfig | None = None,
    pe_threshold: float = DEFAULT_PE_THRESHOLD,
) -> tuple[TimeSeries, DenoiseReport]:
    """Full denoising pass: decompose, partition, shrink, reconstruct."""
    decomp = ceemdan_decompose(series.values, ceemdan_config)
    if not decomp.imfs:
        logger.info("no modes extracted; returning the series unchanged")
        report = DenoiseReport(
            pe_values=(), partition=1, lambdas=(), denoised=series
        )
        return series, report

    partition, pe_values = partition_imfs(decomp, pe_config, pe_threshold)
    n = len(series)
    noisy = decomp.imfs[: partition - 1]
    lambdas = tuple(adaptive_lambda(imf, n) for imf in noisy)
    shrunk = [soft_threshold(imf, lam) for imf, lam in zip(noisy, lambdas)]
    values = reconstruct(decomp, partition, shrunk)
    denoised = series.replace_values(values)
    report = DenoiseReport(
        pe_values=pe_values, partition=partition, lambdas=lambdas, denoised=denoised
    )
    return denoised, report


def write_report(report: DenoiseReport, path) -> None:
    """Serialize the report (minus the series itself) as indented JSON."""
    payload = {
        "n_imfs": len(report.pe_values),
        "pe_values": list(report.pe_values),
        "partition": report.partition,
        "lambdas": list(report.lambdas),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
