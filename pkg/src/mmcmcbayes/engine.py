"""Multistage region-splitting driver.

Each chromosome starts as one segment.  A segment is summarized by the
per-sample mean M-value in each group, both groups are fitted with the ASGN
sampler, and the Bayes factor of the two fits decides whether the segment is
split and carried to the next stage, reported as a DMR (final stage), or
retained without a record.
"""

from __future__ import annotations

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .asgn import AsgnPriors, asgn_log_density, child_priors, default_priors
from .errors import ConfigError, DegenerateError
from .io import MethylationMatrix, validate_pair
from .sampler import McmcConfig, PosteriorSummary, asgn_fit

log = logging.getLogger(__name__)

MIN_FIT_VALUES = 3

SKIPPED = "skipped"
RETAINED = "retained"
SPLIT = "split"
DMR = "dmr"


@dataclass(frozen=True)
class Segment:
    """Inclusive, zero-based row range ``[start_row, end_row]`` on one chromosome.

    ``path`` records the child index taken at each stage and keys the seed
    derivation, so results do not depend on evaluation order.
    """

    chromosome: str
    start_row: int
    end_row: int
    stage: int = 1
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if self.start_row < 0 or self.end_row < self.start_row:
            raise ValueError(f"invalid segment rows [{self.start_row}, {self.end_row}]")
        if self.stage < 1:
            raise ValueError("stage must be >= 1")

    @property
    def cpg_count(self) -> int:
        return self.end_row - self.start_row + 1


@dataclass(frozen=True)
class DmrRecord:
    chromosome: str
    start_cpg_id: str
    end_cpg_id: str
    cpg_count: int
    decision_value: float
    stage: int


@dataclass(frozen=True)
class DetectConfig:
    stage: int = 1
    max_stages: int = 3
    num_splits: int = 50
    bf_thresholds: tuple[float, ...] = (0.5, 0.8, 1.05)
    mcmc: McmcConfig = McmcConfig()
    priors_cancer: Optional[AsgnPriors] = None
    priors_normal: Optional[AsgnPriors] = None
    master_seed: int = 0
    threads: int = 1
    # both groups of a segment share one chain seed (symmetry checks)
    shared_group_seed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "bf_thresholds", tuple(float(t) for t in self.bf_thresholds))
        if self.stage < 1:
            raise ConfigError("stage must be >= 1")
        if self.max_stages < self.stage:
            raise ConfigError("max_stages must be >= stage")
        if self.num_splits < 2:
            raise ConfigError("num_splits must be >= 2")
        if len(self.bf_thresholds) < self.max_stages:
            raise ConfigError(
                f"bf_thresholds has {len(self.bf_thresholds)} entries but max_stages is {self.max_stages}"
            )
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def threshold(self, stage: int) -> float:
        return self.bf_thresholds[stage - 1]


@dataclass
class SegmentResult:
    segment: Segment
    outcome: str
    bayes_factor: Optional[float] = None
    fit_cancer: Optional[PosteriorSummary] = field(default=None, repr=False)
    fit_normal: Optional[PosteriorSummary] = field(default=None, repr=False)


@dataclass
class DetectResult:
    records: list[DmrRecord]
    # every evaluated segment, stage by stage, in genomic order within a stage
    segments: list[SegmentResult]


def region_means(matrix: MethylationMatrix, segment: Segment) -> np.ndarray:
    """Per-sample mean over the segment's rows, ignoring missing cells.

    A sample with no observed cell in the segment gets NaN.
    """
    block = matrix.values[segment.start_row : segment.end_row + 1]
    observed = ~np.isnan(block)
    counts = observed.sum(axis=0)
    sums = np.where(observed, block, 0.0).sum(axis=0)
    out = np.full(block.shape[1], np.nan)
    np.divide(sums, counts, out=out, where=counts > 0)
    return out


def split_segment(segment: Segment, num_splits: int) -> list[Segment]:
    """Split into ``min(num_splits, cpg_count)`` contiguous pieces, larger pieces first."""
    if num_splits < 2:
        raise ConfigError("num_splits must be >= 2")
    n = segment.cpg_count
    s = min(num_splits, n)
    q, r = divmod(n, s)
    out = []
    start = segment.start_row
    for i in range(s):
        size = q + 1 if i < r else q
        out.append(
            Segment(segment.chromosome, start, start + size - 1, segment.stage + 1, segment.path + (i,))
        )
        start += size
    return out


def bayes_factor(cancer_means, normal_means, fit_c: PosteriorSummary, fit_n: PosteriorSummary) -> float:
    """Sum of cancer densities over sum of normal densities, each at its own posterior means.

    Missing regional values are skipped.
    """
    yc = np.asarray(cancer_means, dtype=float)
    yn = np.asarray(normal_means, dtype=float)
    yc = yc[np.isfinite(yc)]
    yn = yn[np.isfinite(yn)]
    if yc.size == 0 or yn.size == 0:
        raise DegenerateError("Bayes factor needs at least one finite value per group")
    with np.errstate(over="ignore", invalid="ignore"):
        num = logsumexp(asgn_log_density(yc, fit_c.mean))
        den = logsumexp(asgn_log_density(yn, fit_n.mean))
    if not (np.isfinite(num) and np.isfinite(den)):
        raise DegenerateError("density sum vanished or overflowed")
    return math.exp(num - den)


def derive_seed(master_seed: int, chromosome: str, stage: int, path, group: str) -> int:
    key = f"{master_seed}|{chromosome}|{stage}|{'.'.join(map(str, path))}|{group}"
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "little")


def _evaluate(segment, parents, cancer, normal, config: DetectConfig) -> SegmentResult:
    yc = region_means(cancer, segment)
    yn = region_means(normal, segment)
    if np.isfinite(yc).sum() < MIN_FIT_VALUES or np.isfinite(yn).sum() < MIN_FIT_VALUES:
        return SegmentResult(segment, SKIPPED)

    fits = []
    for group, y, user, parent in (
        ("cancer", yc, config.priors_cancer, parents[0] if parents else None),
        ("normal", yn, config.priors_normal, parents[1] if parents else None),
    ):
        if parent is not None:
            priors = child_priors(parent)
        else:
            priors = user if user is not None else default_priors(y)
        tag = "shared" if config.shared_group_seed else group
        seed = derive_seed(config.master_seed, segment.chromosome, segment.stage, segment.path, tag)
        fits.append(asgn_fit(y, priors, replace(config.mcmc, seed=seed), keep_samples=False))

    bf = bayes_factor(yc, yn, fits[0], fits[1])
    if bf > config.threshold(segment.stage):
        final = segment.stage >= config.max_stages or segment.cpg_count < 2
        outcome = DMR if final else SPLIT
    else:
        outcome = RETAINED
    return SegmentResult(segment, outcome, bf, fits[0], fits[1])


def detect(cancer: MethylationMatrix, normal: MethylationMatrix, config: DetectConfig = DetectConfig()) -> DetectResult:
    """Run the multistage procedure and keep the per-segment trace."""
    validate_pair(cancer, normal)
    live = [
        (Segment(chrom, start, end, config.stage, (i,)), None)
        for i, (chrom, start, end) in enumerate(cancer.chromosome_runs())
    ]
    evaluated: list[SegmentResult] = []
    hits: list[SegmentResult] = []

    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        while live:
            stage = live[0][0].stage
            log.info("stage %d: evaluating %d segment(s)", stage, len(live))
            results = list(pool.map(lambda item: _evaluate(item[0], item[1], cancer, normal, config), live))
            evaluated.extend(results)
            live = []
            for res in results:
                if res.outcome == SPLIT:
                    parents = (res.fit_cancer, res.fit_normal)
                    live.extend((child, parents) for child in split_segment(res.segment, config.num_splits))
                elif res.outcome == DMR:
                    hits.append(res)

    hits.sort(key=lambda r: r.segment.start_row)
    records = [
        DmrRecord(
            chromosome=r.segment.chromosome,
            start_cpg_id=cancer.cpg_ids[r.segment.start_row],
            end_cpg_id=cancer.cpg_ids[r.segment.end_row],
            cpg_count=r.segment.cpg_count,
            decision_value=r.bayes_factor,
            stage=r.segment.stage,
        )
        for r in hits
    ]
    log.info("detected %d region(s)", len(records))
    return DetectResult(records, evaluated)


def mmcmc_detect(
    cancer: MethylationMatrix, normal: MethylationMatrix, config: DetectConfig = DetectConfig()
) -> list[DmrRecord]:
    return detect(cancer, normal, config).records
