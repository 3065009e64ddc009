"""Re-compression chains, distortion metrics, and Monte Carlo rho estimation.

rho(q_min, k) is the expected distortion between the single-pass
reconstruction at q_min and the k-round chained reconstruction, estimated
over (item, trial) pairs with a fresh quality sequence per pair.

Every random draw comes from a stream derived deterministically from
(master_seed, purpose, q_min, k, item, trial), so results are independent
of worker scheduling.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from .codecs import Codec, CodecError
from .signals import ImageBuffer, Signal, SourceVector, Dataset

MODES = ("literal", "forced-min")
DISTORTION_KINDS = ("MSE", "RMSE", "PSNR")

# stream-purpose tags for derived RNGs
STREAM_RHO = 0
STREAM_RD = 1
STREAM_SOURCE = 2


def derive_rng(master_seed: int, *coords: int) -> np.random.Generator:
    """PCG64 stream keyed by (master_seed, coords...)."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, coords)]))


def _mse(a: Signal, b: Signal) -> float:
    if isinstance(a, SourceVector) and isinstance(b, SourceVector):
        if len(a) != len(b):
            raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
        diff = a.values - b.values
    elif isinstance(a, ImageBuffer) and isinstance(b, ImageBuffer):
        if (a.width, a.height, a.channels) != (b.width, b.height, b.channels):
            raise ValueError("image dimension mismatch")
        diff = a.samples.astype(np.float64) - b.samples.astype(np.float64)
    else:
        raise ValueError("cannot compare an image with a source vector")
    return float(np.mean(diff * diff))


def signal_peak(a: Signal) -> float:
    return 255.0 if isinstance(a, ImageBuffer) else 1.0


def psnr_from_mse(mse: float, peak: float) -> float:
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def distortion(a: Signal, b: Signal, kind: str = "MSE") -> float:
    """MSE, RMSE, or PSNR between two signals of the same kind and shape."""
    if kind not in DISTORTION_KINDS:
        raise ValueError(f"unknown distortion kind {kind!r}")
    mse = _mse(a, b)
    if kind == "MSE":
        return mse
    if kind == "RMSE":
        return math.sqrt(mse)
    return psnr_from_mse(mse, signal_peak(a))


def _from_mse(mse: float, kind: str, peak: float) -> float:
    if kind == "MSE":
        return mse
    if kind == "RMSE":
        return math.sqrt(mse)
    return psnr_from_mse(mse, peak)


@dataclasses.dataclass(frozen=True)
class QualitySequence:
    """Ordered quality levels q_1..q_k driving one chain."""

    levels: tuple[int, ...]
    mode: str
    q_min: int
    q_max: int

    def __post_init__(self):
        if not self.levels:
            raise ValueError("empty quality sequence")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if any(not self.q_min <= q <= self.q_max for q in self.levels):
            raise ValueError("sequence level outside [q_min, q_max]")
        if self.mode == "forced-min" and min(self.levels) != self.q_min:
            raise ValueError("forced-min sequence must attain q_min")

    @property
    def k(self) -> int:
        return len(self.levels)


def sample_quality_sequence(
    q_min: int, q_max: int, k: int, mode: str, rng: np.random.Generator
) -> QualitySequence:
    """k iid uniform draws from [q_min, q_max]; forced-min overwrites one
    uniformly chosen position with q_min."""
    if q_min > q_max:
        raise ValueError(f"q_min {q_min} > q_max {q_max}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    levels = rng.integers(q_min, q_max + 1, size=k)
    if mode == "forced-min":
        levels[int(rng.integers(k))] = q_min
    return QualitySequence(tuple(int(q) for q in levels), mode, q_min, q_max)


@dataclasses.dataclass
class ChainResult:
    final: Signal
    stage_bpp: list[float]

    @property
    def stage_count(self) -> int:
        return len(self.stage_bpp)


def compress_chain(x: Signal, seq: QualitySequence, codec: Codec) -> ChainResult:
    """Apply reconstruct sequentially: y_i = f(y_{i-1}, q_i)."""
    y = x
    stage_bpp = []
    for stage, q in enumerate(seq.levels, start=1):
        try:
            y, bs = codec.reconstruct(y, q)
        except Exception as e:
            raise CodecError(f"chain stage {stage} (quality {q}) failed: {e}") from e
        stage_bpp.append(codec.bpp(bs, x))
    return ChainResult(final=y, stage_bpp=stage_bpp)


@dataclasses.dataclass
class PairOutcome:
    """Per-(item, trial) measurements shared by rho, theorem-1, and RD checks.

    All distortions are stored as MSE; other kinds are derived.
    """

    item: int
    trial: int
    seq: QualitySequence
    mse_single_vs_chain: float  # d(f(x, q_min), chain final) -- the rho term
    mse_x_vs_single: float
    mse_x_vs_chain: float
    single_bpp: float
    chain_final_bpp: float
    peak: float


def evaluate_cell(
    ds: Dataset,
    codec: Codec,
    q_min: int,
    k: int,
    b: int,
    mode: str = "forced-min",
    master_seed: int = 0,
) -> list[PairOutcome]:
    """Run b independent chains per dataset item for one (q_min, k) cell."""
    codec.check_quality(q_min)
    if b < 1:
        raise ValueError("b must be >= 1")
    q_max = codec.num_levels
    outcomes = []
    for i, x in enumerate(ds.items):
        single, single_bs = codec.reconstruct(x, q_min)
        single_bpp = codec.bpp(single_bs, x)
        mse_x_single = _mse(x, single)
        for t in range(b):
            rng = derive_rng(master_seed, STREAM_RHO, q_min, k, i, t)
            seq = sample_quality_sequence(q_min, q_max, k, mode, rng)
            chain = compress_chain(x, seq, codec)
            outcomes.append(
                PairOutcome(
                    item=i,
                    trial=t,
                    seq=seq,
                    mse_single_vs_chain=_mse(single, chain.final),
                    mse_x_vs_single=mse_x_single,
                    mse_x_vs_chain=_mse(x, chain.final),
                    single_bpp=single_bpp,
                    chain_final_bpp=chain.stage_bpp[-1],
                    peak=signal_peak(x),
                )
            )
    return outcomes


@dataclasses.dataclass
class RhoEstimate:
    """Monte Carlo estimate of rho(q_min, k)."""

    q_min: int
    k: int
    b: int
    distortion_kind: str
    mean: float
    sample_std: float
    std_err: float
    n_pairs: int
    per_trial: list[float] | None = None


def _aggregate(values: list[float]) -> tuple[float, float, float]:
    arr = np.asarray(values, dtype=np.float64)
    if np.any(np.isinf(arr)):
        # only PSNR with a zero-MSE pair; spread is not meaningful then
        return math.inf, 0.0, 0.0
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, std, std / math.sqrt(arr.size)


def rho_from_outcomes(
    outcomes: list[PairOutcome], q_min: int, k: int, b: int, kind: str = "MSE",
    keep_per_trial: bool = False,
) -> RhoEstimate:
    if kind not in DISTORTION_KINDS:
        raise ValueError(f"unknown distortion kind {kind!r}")
    vals = [_from_mse(o.mse_single_vs_chain, kind, o.peak) for o in outcomes]
    mean, std, se = _aggregate(vals)
    return RhoEstimate(
        q_min=q_min, k=k, b=b, distortion_kind=kind,
        mean=mean, sample_std=std, std_err=se, n_pairs=len(vals),
        per_trial=vals if keep_per_trial else None,
    )


def estimate_rho(
    ds: Dataset,
    codec: Codec,
    q_min: int,
    k: int,
    b: int,
    kind: str = "MSE",
    mode: str = "forced-min",
    master_seed: int = 0,
    keep_per_trial: bool = False,
) -> RhoEstimate:
    """Monte Carlo rho(q_min, k): mean d(f(x, q_min), chain) over (item, trial)."""
    outcomes = evaluate_cell(ds, codec, q_min, k, b, mode, master_seed)
    return rho_from_outcomes(outcomes, q_min, k, b, kind, keep_per_trial)
