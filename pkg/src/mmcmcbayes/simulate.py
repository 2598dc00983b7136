"""Synthetic benchmark generation and scoring of detection output.

A baseline matrix (real data, or :func:`synthetic_baseline`) is copied into a
cancer and a normal group, each gets independent Gaussian noise, and a number
of non-overlapping blocks of consecutive CpGs are shifted upward in the
cancer group only.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InfeasiblePlacementError, UnknownCpGError
from .io import MethylationMatrix

MAX_PLACEMENT_TRIES = 10_000


@dataclass(frozen=True)
class TruthInterval:
    chromosome: str
    start_row: int
    end_row: int
    shift: float

    @property
    def length(self) -> int:
        return self.end_row - self.start_row + 1


@dataclass(frozen=True)
class SimConfig:
    baseline: MethylationMatrix = field(repr=False)
    noise_sd: float = 0.5
    n_dmrs: int = 10
    shifts: tuple[float, ...] = (1.0, 2.0)
    lengths: tuple[int, ...] = (10, 20, 50)
    seed: int = 0

    def __post_init__(self):
        if not (self.noise_sd >= 0 and math.isfinite(self.noise_sd)):
            raise ConfigError("noise_sd must be >= 0")
        if self.n_dmrs < 0:
            raise ConfigError("n_dmrs must be >= 0")
        if self.n_dmrs and (not self.shifts or not self.lengths):
            raise ConfigError("shifts and lengths must be non-empty")
        if any(length < 1 for length in self.lengths):
            raise ConfigError("DMR lengths must be >= 1")


def synthetic_baseline(
    n_cpg: int = 5000,
    n_samples: int = 10,
    chromosome: str = "6",
    seed: int = 0,
    missing_rate: float = 0.0,
) -> MethylationMatrix:
    """Array-like M-value background for simulations and demos.

    CpG means are bimodal (a hypomethylated mode near -3 and a methylated mode
    near 2) with an AR(1) latent state so neighbouring sites are correlated;
    every sample adds its own site-level deviation.
    """
    rng = np.random.default_rng(seed)
    latent = np.empty(n_cpg)
    latent[0] = rng.standard_normal()
    innov = rng.standard_normal(n_cpg) * math.sqrt(1 - 0.8**2)
    for i in range(1, n_cpg):
        latent[i] = 0.8 * latent[i - 1] + innov[i]
    methylated = latent > -0.3
    site_mean = np.where(methylated, 2.0, -3.0) + 0.6 * rng.standard_normal(n_cpg)
    values = site_mean[:, None] + 0.3 * rng.standard_normal((n_cpg, n_samples))
    if missing_rate > 0:
        values[rng.random(values.shape) < missing_rate] = np.nan
    ids = [f"cg{i:08d}" for i in range(n_cpg)]
    return MethylationMatrix(ids, [chromosome] * n_cpg, values, [f"M_sample_{j + 1}" for j in range(n_samples)])


def _free_starts(occupied, chrom_id, length):
    """Start rows whose window of ``length`` rows is free and on one chromosome."""
    n = occupied.size
    if length > n:
        return np.empty(0, dtype=np.int64)
    busy = np.concatenate([[0], np.cumsum(occupied)])
    starts = np.arange(n - length + 1)
    clear = busy[starts + length] - busy[starts] == 0
    same = chrom_id[starts] == chrom_id[starts + length - 1]
    return starts[clear & same]


def _place(rng, chrom_id, lengths_drawn):
    # each region is drawn uniformly among currently feasible starts; a dead
    # end (earlier regions fragmenting the free space) restarts the whole draw
    for _ in range(MAX_PLACEMENT_TRIES):
        occupied = np.zeros(chrom_id.size, dtype=np.int64)
        out = []
        for length in lengths_drawn:
            starts = _free_starts(occupied, chrom_id, length)
            if starts.size == 0:
                break
            start = int(starts[rng.integers(starts.size)])
            occupied[start : start + length] = 1
            out.append((start, start + length - 1))
        else:
            return out
        if not out and starts.size == 0:
            raise InfeasiblePlacementError(f"no chromosome can hold a DMR of length {length}")
    raise InfeasiblePlacementError(
        f"could not place {len(lengths_drawn)} disjoint DMRs after {MAX_PLACEMENT_TRIES} attempts"
    )


def simulate_dataset(config: SimConfig):
    """Return ``(cancer, normal, truth)`` where truth is a list of :class:`TruthInterval`."""
    base = config.baseline
    rng = np.random.default_rng(config.seed)

    lengths = [int(rng.choice(config.lengths)) for _ in range(config.n_dmrs)]
    shifts = [float(rng.choice(config.shifts)) for _ in range(config.n_dmrs)]
    if sum(lengths) > base.n_cpg:
        raise InfeasiblePlacementError(f"total DMR length {sum(lengths)} exceeds {base.n_cpg} CpGs")
    chrom_id = np.empty(base.n_cpg, dtype=np.int64)
    for k, (_, lo, hi) in enumerate(base.chromosome_runs()):
        chrom_id[lo : hi + 1] = k
    placed = _place(rng, chrom_id, lengths)

    cancer = base.values + rng.normal(0.0, config.noise_sd, base.values.shape)
    normal = base.values + rng.normal(0.0, config.noise_sd, base.values.shape)
    truth = []
    for (start, end), shift in zip(placed, shifts):
        cancer[start : end + 1] += shift
        truth.append(TruthInterval(base.chromosomes[start], start, end, shift))
    truth.sort(key=lambda t: t.start_row)

    def wrap(values):
        return MethylationMatrix(base.cpg_ids, base.chromosomes, values, base.sample_names)

    return wrap(cancer), wrap(normal), truth


def record_rows(records, cpg_index: MethylationMatrix) -> list[tuple[int, int]]:
    """Resolve ``Start_CpG``/``End_CpG`` of DMR records to row ranges."""
    rows = cpg_index.row_of()
    out = []
    for rec in records:
        try:
            start, end = rows[rec.start_cpg_id], rows[rec.end_cpg_id]
        except KeyError as exc:
            raise UnknownCpGError(f"CpG {exc.args[0]!r} not found in the index") from None
        if end < start:
            start, end = end, start
        out.append((start, end))
    return out


def evaluate(detected, truth, cpg_index: MethylationMatrix) -> dict:
    """Region-level sensitivity / FDR plus CpG-level precision / recall.

    A detected region matches a truth interval when they share at least one
    CpG row.
    """
    det = record_rows(detected, cpg_index)
    tru = [(t.start_row, t.end_row) for t in truth]

    def hit(a, b):
        return a[0] <= b[1] and b[0] <= a[1]

    found = sum(any(hit(t, d) for d in det) for t in tru)
    false = sum(not any(hit(d, t) for t in tru) for d in det)

    det_rows = set()
    for s, e in det:
        det_rows.update(range(s, e + 1))
    true_rows = set()
    for s, e in tru:
        true_rows.update(range(s, e + 1))
    shared = len(det_rows & true_rows)

    return {
        "sensitivity": found / len(tru) if tru else 0.0,
        "fdr": false / max(1, len(det)),
        "n_detected": len(det),
        "n_false": false,
        "n_truth": len(tru),
        "cpg_precision": shared / len(det_rows) if det_rows else 0.0,
        "cpg_recall": shared / len(true_rows) if true_rows else 0.0,
    }


def write_truth(truth, cpg_index: MethylationMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["Chromosome", "Start_CpG", "End_CpG", "Start_Row", "End_Row", "Length", "Shift"])
        for t in truth:
            writer.writerow(
                [
                    t.chromosome,
                    cpg_index.cpg_ids[t.start_row],
                    cpg_index.cpg_ids[t.end_row],
                    t.start_row,
                    t.end_row,
                    t.length,
                    repr(t.shift),
                ]
            )


def read_truth(path) -> list[TruthInterval]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            TruthInterval(row["Chromosome"], int(row["Start_Row"]), int(row["End_Row"]), float(row["Shift"]))
            for row in csv.DictReader(fh)
        ]
