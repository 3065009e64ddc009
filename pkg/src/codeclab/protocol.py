"""End-to-end evaluation protocol: rho grids, RD curves, and verification sweeps."""
from __future__ import annotations

import dataclasses
import itertools
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .chains import (
    PairOutcome,
    RhoEstimate,
    STREAM_RD,
    STREAM_SOURCE,
    compress_chain,
    derive_rng,
    distortion,
    evaluate_cell,
    psnr_from_mse,
    rho_from_outcomes,
    sample_quality_sequence,
    signal_peak,
    QualitySequence,
    _aggregate,
    _mse,
)
from .codecs import Codec
from .registry import make_codec
from .signals import Dataset, generate_uniform_source, load_dataset


class ConfigError(ValueError):
    """Invalid or unknown evaluation configuration."""


DEFAULT_K_LIST = (10, 50)
DEFAULT_B = 10
DEFAULT_MODE = "forced-min"
DEFAULT_KIND = "MSE"
DEFAULT_SOURCE_N = 10_000

# decisions that shape reported numbers; echoed into every report
DECISIONS_IN_FORCE = (
    "quantizer tie-break: larger codeword",
    "rho averaging: per (item, trial) pair with a fresh quality sequence each",
    "default sampling mode: forced-min (sequence minimum pinned to q_min)",
    "rng: numpy PCG64 streams keyed by (master_seed, purpose, q_min, k, item, trial)",
    "rd_multi bitrate: final-stage bits",
    "rounding: half-away-from-zero",
)


@dataclasses.dataclass
class EvalConfig:
    codec: str
    codec_options: dict = dataclasses.field(default_factory=dict)
    dataset: str | None = None
    q_min_list: list[int] | None = None
    k_list: list[int] = dataclasses.field(default_factory=lambda: list(DEFAULT_K_LIST))
    b: int = DEFAULT_B
    mode: str = DEFAULT_MODE
    distortion: str = DEFAULT_KIND
    master_seed: int = 0

    _FIELDS = (
        "codec", "codec_options", "dataset", "q_min_list",
        "k_list", "b", "mode", "distortion", "master_seed",
    )

    @classmethod
    def from_json(cls, text: str | bytes) -> "EvalConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(doc) - set(cls._FIELDS)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "codec" not in doc:
            raise ConfigError("config missing required field 'codec'")
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> "EvalConfig":
        return cls.from_json(Path(path).read_text())

    def validate(self) -> None:
        if self.b < 1:
            raise ConfigError("b must be >= 1")
        if not self.k_list or any(k < 1 for k in self.k_list):
            raise ConfigError("k_list must be non-empty positive integers")
        if self.q_min_list is not None and not self.q_min_list:
            raise ConfigError("q_min_list must be non-empty when given")
        if self.mode not in ("literal", "forced-min"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.distortion not in ("MSE", "RMSE", "PSNR"):
            raise ConfigError(f"unknown distortion kind {self.distortion!r}")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be a non-negative integer")


@dataclasses.dataclass
class Theorem1Record:
    """Statistical check that single-pass distortion <= chained distortion."""

    q_min: int
    k: int
    mean_single: float
    mean_chain: float
    std_err_single: float
    std_err_chain: float
    satisfied: bool


@dataclasses.dataclass
class RdPoint:
    quality: int
    mean_bpp: float
    mean_psnr: float
    mean_mse: float


@dataclasses.dataclass
class IdempotenceSweep:
    """Worst/mean deviation between chains and single-pass over all sequences."""

    sequences_checked: int
    max_mse: float
    mean_mse: float
    max_rmse: float
    worst_sequence: tuple[int, ...] | None


@dataclasses.dataclass
class EvalReport:
    config: dict
    grid: list[RhoEstimate]
    rd_single: list[RdPoint]
    rd_multi: dict[int, list[RdPoint]]
    theorem1: list[Theorem1Record]
    provenance: dict

    def to_dict(self) -> dict:
        def num(x):
            return "inf" if isinstance(x, float) and math.isinf(x) else x

        def rd(points):
            return [
                {
                    "quality": p.quality,
                    "mean_bpp": num(p.mean_bpp),
                    "mean_psnr": num(p.mean_psnr),
                    "mean_mse": num(p.mean_mse),
                }
                for p in points
            ]

        return {
            "config": self.config,
            "grid": [
                {
                    "q_min": g.q_min,
                    "k": g.k,
                    "b": g.b,
                    "distortion_kind": g.distortion_kind,
                    "mean": num(g.mean),
                    "sample_std": num(g.sample_std),
                    "std_err": num(g.std_err),
                    "n_pairs": g.n_pairs,
                }
                for g in self.grid
            ],
            "rd_single": rd(self.rd_single),
            "rd_multi": {str(k): rd(v) for k, v in self.rd_multi.items()},
            "theorem1": [
                {
                    "q_min": t.q_min,
                    "k": t.k,
                    "mean_single": num(t.mean_single),
                    "mean_chain": num(t.mean_chain),
                    "std_err_single": num(t.std_err_single),
                    "std_err_chain": num(t.std_err_chain),
                    "satisfied": t.satisfied,
                }
                for t in self.theorem1
            ],
            "provenance": self.provenance,
        }


def resolve_dataset(cfg: EvalConfig, codec: Codec) -> Dataset:
    """Images from cfg.dataset, or a deterministic synthetic uniform source."""
    if codec.signal_kind == "image":
        if cfg.dataset is None:
            raise ConfigError(f"codec {codec.codec_id!r} needs a dataset directory")
        return load_dataset(cfg.dataset)
    n = int(cfg.codec_options.get("source_n", DEFAULT_SOURCE_N))
    seed_seq = np.random.SeedSequence([cfg.master_seed, STREAM_SOURCE])
    seed = int(seed_seq.generate_state(1, np.uint64)[0])
    return Dataset.from_source(generate_uniform_source(n, seed))


def theorem1_from_outcomes(
    outcomes: list[PairOutcome], q_min: int, k: int
) -> Theorem1Record:
    mean_s, _, se_s = _aggregate([o.mse_x_vs_single for o in outcomes])
    mean_c, _, se_c = _aggregate([o.mse_x_vs_chain for o in outcomes])
    slack = 3.0 * math.sqrt(se_s**2 + se_c**2)
    return Theorem1Record(
        q_min=q_min,
        k=k,
        mean_single=mean_s,
        mean_chain=mean_c,
        std_err_single=se_s,
        std_err_chain=se_c,
        satisfied=mean_c >= mean_s - slack,
    )


def theorem1_check(
    ds: Dataset,
    codec: Codec,
    q_min: int,
    k: int,
    b: int,
    mode: str = "forced-min",
    master_seed: int = 0,
) -> Theorem1Record:
    """Estimate E[d(x, single)] vs E[d(x, chain)] in MSE and compare at 3 SE."""
    outcomes = evaluate_cell(ds, codec, q_min, k, b, mode, master_seed)
    return theorem1_from_outcomes(outcomes, q_min, k)


def compute_rd_curves(
    ds: Dataset,
    codec: Codec,
    k: int,
    b: int,
    mode: str = "forced-min",
    master_seed: int = 0,
) -> tuple[list[RdPoint], list[RdPoint]]:
    """Single-pass RD points per ladder level, and multi-round points per q_min.

    rd_multi PSNR compares the chain final against the ORIGINAL signal; its
    bitrate is the final stage's (what a downstream consumer would hold).
    """
    rd_single = []
    for q in range(1, codec.num_levels + 1):
        bpps, mses = [], []
        for x in ds.items:
            recon, bs = codec.reconstruct(x, q)
            bpps.append(codec.bpp(bs, x))
            mses.append(_mse(x, recon))
        mean_mse = float(np.mean(mses))
        psnrs = [psnr_from_mse(m, signal_peak(ds.items[0])) for m in mses]
        mean_psnr = math.inf if any(math.isinf(p) for p in psnrs) else float(np.mean(psnrs))
        rd_single.append(RdPoint(q, float(np.mean(bpps)), mean_psnr, mean_mse))
    rd_multi = []
    for q_min in range(1, codec.num_levels + 1):
        bpps, mses, psnrs = [], [], []
        for i, x in enumerate(ds.items):
            for t in range(b):
                rng = derive_rng(master_seed, STREAM_RD, q_min, k, i, t)
                seq = sample_quality_sequence(q_min, codec.num_levels, k, mode, rng)
                chain = compress_chain(x, seq, codec)
                m = _mse(x, chain.final)
                bpps.append(chain.stage_bpp[-1])
                mses.append(m)
                psnrs.append(psnr_from_mse(m, signal_peak(x)))
        mean_psnr = math.inf if any(math.isinf(p) for p in psnrs) else float(np.mean(psnrs))
        rd_multi.append(RdPoint(q_min, float(np.mean(bpps)), mean_psnr, float(np.mean(mses))))
    return rd_single, rd_multi


def verify_strong_idempotence(
    codec: Codec,
    inputs: list,
    max_len: int,
    kinds: tuple[str, ...] = ("MSE", "RMSE"),
    sequence_guard: int = 1_000_000,
) -> IdempotenceSweep:
    """Enumerate every quality sequence up to max_len and compare each chain
    against the single pass at the sequence minimum."""
    q_levels = codec.num_levels
    total = sum(q_levels**length for length in range(1, max_len + 1))
    if total > sequence_guard:
        raise ValueError(f"{total} sequences exceeds the {sequence_guard} guard")
    max_mse = 0.0
    sum_mse = 0.0
    count = 0
    worst = None
    singles = {}
    for x in inputs:
        for q in range(1, q_levels + 1):
            singles[q], _ = codec.reconstruct(x, q)
        for length in range(1, max_len + 1):
            for seq_levels in itertools.product(range(1, q_levels + 1), repeat=length):
                seq = QualitySequence(seq_levels, "literal", 1, q_levels)
                chain = compress_chain(x, seq, codec)
                dev = _mse(singles[min(seq_levels)], chain.final)
                sum_mse += dev
                count += 1
                if dev > max_mse:
                    max_mse = dev
                    worst = seq_levels
    return IdempotenceSweep(
        sequences_checked=count,
        max_mse=max_mse,
        mean_mse=sum_mse / count,
        max_rmse=math.sqrt(max_mse),
        worst_sequence=worst,
    )


def run_protocol(cfg: EvalConfig) -> EvalReport:
    """Dataset prep, (q_min, k) grid selection, per-cell Monte Carlo, aggregation."""
    cfg.validate()
    codec = make_codec(cfg.codec, cfg.codec_options)
    ds = resolve_dataset(cfg, codec)
    q_min_list = cfg.q_min_list or list(range(1, codec.num_levels + 1))
    for q in q_min_list:
        if not 1 <= q <= codec.num_levels:
            raise ConfigError(f"q_min {q} outside codec ladder [1, {codec.num_levels}]")
    grid: list[RhoEstimate] = []
    theorem1: list[Theorem1Record] = []
    for q_min in q_min_list:
        for k in cfg.k_list:
            try:
                outcomes = evaluate_cell(
                    ds, codec, q_min, k, cfg.b, cfg.mode, cfg.master_seed
                )
            except Exception as e:
                raise RuntimeError(f"grid cell (q_min={q_min}, k={k}) failed: {e}") from e
            grid.append(
                rho_from_outcomes(outcomes, q_min, k, cfg.b, cfg.distortion)
            )
            theorem1.append(theorem1_from_outcomes(outcomes, q_min, k))
    rd_single: list[RdPoint] = []
    rd_multi: dict[int, list[RdPoint]] = {}
    for k in cfg.k_list:
        rd_single, multi = compute_rd_curves(
            ds, codec, k, cfg.b, cfg.mode, cfg.master_seed
        )
        rd_multi[k] = multi
    config_echo = {
        "codec": cfg.codec,
        "codec_options": cfg.codec_options,
        "dataset": cfg.dataset,
        "q_min_list": list(q_min_list),
        "k_list": list(cfg.k_list),
        "b": cfg.b,
        "mode": cfg.mode,
        "distortion": cfg.distortion,
        "master_seed": cfg.master_seed,
        "codec_ladder_levels": codec.num_levels,
        "dataset_items": list(ds.item_names),
        "dataset_warnings": list(ds.warnings),
        "decisions": list(DECISIONS_IN_FORCE),
    }
    provenance = {
        "tool": "codeclab",
        "version": __version__,
        "rng": "numpy PCG64 (default_rng) with SeedSequence-derived streams",
    }
    return EvalReport(
        config=config_echo,
        grid=grid,
        rd_single=rd_single,
        rd_multi=rd_multi,
        theorem1=theorem1,
        provenance=provenance,
    )
