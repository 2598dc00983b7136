"""Reading and writing methylation matrices and DMR tables."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError, DuplicateCpGError, PairMismatchError, ParseError

MISSING_TOKENS = frozenset({"", "NA"})
DMR_COLUMNS = ("Chromosome", "Start_CpG", "End_CpG", "CpG_Count", "Decision_Value", "Stage")
BETA_OFFSET = 1e-6


@dataclass(frozen=True, eq=False)
class MethylationMatrix:
    """CpG-by-sample table of M-values.

    ``values`` has shape ``(n_cpg, n_sample)``; missing cells are NaN.
    Rows of one chromosome must be contiguous.
    """

    cpg_ids: tuple[str, ...]
    chromosomes: tuple[str, ...]
    values: np.ndarray
    sample_names: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DataError("values must be a 2-D grid")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "cpg_ids", tuple(self.cpg_ids))
        object.__setattr__(self, "chromosomes", tuple(str(c) for c in self.chromosomes))
        object.__setattr__(self, "sample_names", tuple(self.sample_names))

        n_cpg, n_sample = values.shape
        if len(self.cpg_ids) != n_cpg or len(self.chromosomes) != n_cpg:
            raise DataError("cpg_ids, chromosomes and values disagree on the number of rows")
        if n_sample < 1 or len(self.sample_names) != n_sample:
            raise DataError("need at least one sample column with a name")
        seen = {}
        for i, cpg in enumerate(self.cpg_ids):
            if cpg in seen:
                raise DuplicateCpGError(f"duplicate CpG_ID {cpg!r} at rows {seen[cpg] + 1} and {i + 1}")
            seen[cpg] = i
        closed = set()
        for i in range(1, n_cpg):
            prev, cur = self.chromosomes[i - 1], self.chromosomes[i]
            if cur != prev:
                closed.add(prev)
                if cur in closed:
                    raise DataError(
                        f"chromosome {cur!r} rows are not contiguous (row {i + 1}); sort input by chromosome"
                    )

    @property
    def n_cpg(self) -> int:
        return self.values.shape[0]

    @property
    def n_sample(self) -> int:
        return self.values.shape[1]

    def row_of(self) -> dict[str, int]:
        return {cpg: i for i, cpg in enumerate(self.cpg_ids)}

    def chromosome_runs(self) -> list[tuple[str, int, int]]:
        """``(label, start_row, end_row)`` for each contiguous chromosome block."""
        runs = []
        start = 0
        for i in range(1, self.n_cpg + 1):
            if i == self.n_cpg or self.chromosomes[i] != self.chromosomes[start]:
                runs.append((self.chromosomes[start], start, i - 1))
                start = i
        return runs


def _parse_cell(text: str, row: int, column: int) -> float:
    token = text.strip()
    if token in MISSING_TOKENS:
        return math.nan
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"non-numeric cell {token!r}", row=row, column=column) from None


def load_methylation_csv(path, beta: bool = False) -> MethylationMatrix:
    """Load a ``CpG_ID,Chromosome,<samples...>`` CSV file.

    Empty cells and ``NA`` are missing.  With ``beta=True`` the sample columns
    hold beta-values and are converted to M-values on load.
    Rows and columns in error messages are 1-based file coordinates.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", row=1) from None
        header = [h.strip() for h in header]
        if len(header) < 3 or header[0] != "CpG_ID" or header[1] != "Chromosome":
            raise ParseError(
                "header must start with CpG_ID,Chromosome followed by at least one sample column", row=1
            )
        width = len(header)
        ids, chroms, rows = [], [], []
        for lineno, record in enumerate(reader, start=2):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if len(record) != width:
                raise ParseError(f"expected {width} fields, found {len(record)}", row=lineno)
            cpg = record[0].strip()
            if not cpg:
                raise ParseError("empty CpG_ID", row=lineno, column=1)
            ids.append(cpg)
            chroms.append(record[1].strip())
            rows.append([_parse_cell(cell, lineno, col) for col, cell in enumerate(record[2:], start=3)])

    values = np.array(rows, dtype=float).reshape(len(rows), width - 2)
    if beta:
        values = beta_to_m(values)
    return MethylationMatrix(ids, chroms, values, header[2:])


def write_methylation_csv(matrix: MethylationMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["CpG_ID", "Chromosome", *matrix.sample_names])
        for cpg, chrom, row in zip(matrix.cpg_ids, matrix.chromosomes, matrix.values):
            writer.writerow([cpg, chrom, *("NA" if math.isnan(v) else repr(float(v)) for v in row)])


def validate_pair(cancer: MethylationMatrix, normal: MethylationMatrix) -> None:
    """Raise :class:`PairMismatchError` unless both matrices list the same CpGs in the same order.

    The reported row is 1-based.  Sample counts may differ.
    """
    n = min(cancer.n_cpg, normal.n_cpg)
    for i in range(n):
        if cancer.cpg_ids[i] != normal.cpg_ids[i]:
            raise PairMismatchError(
                f"CpG mismatch at row {i + 1}: {cancer.cpg_ids[i]!r} vs {normal.cpg_ids[i]!r}", row=i + 1
            )
        if cancer.chromosomes[i] != normal.chromosomes[i]:
            raise PairMismatchError(
                f"chromosome mismatch at row {i + 1}: {cancer.chromosomes[i]!r} vs {normal.chromosomes[i]!r}",
                row=i + 1,
            )
    if cancer.n_cpg != normal.n_cpg:
        raise PairMismatchError(
            f"row count mismatch: {cancer.n_cpg} vs {normal.n_cpg} (first unmatched row {n + 1})", row=n + 1
        )


def beta_to_m(beta, c: float = BETA_OFFSET):
    """M-value ``log((beta + c) / (1 - beta + c))``; NaN passes through."""
    if not c > 0:
        raise DomainError("offset c must be positive")
    b = np.asarray(beta, dtype=float)
    finite = b[~np.isnan(b)]
    if np.any((finite < 0) | (finite > 1)):
        raise DomainError("beta-values must lie in [0, 1]")
    out = np.log((b + c) / (1.0 - b + c))
    return float(out) if out.ndim == 0 else out


def write_dmr_table(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DMR_COLUMNS)
        for r in records:
            writer.writerow(
                [r.chromosome, r.start_cpg_id, r.end_cpg_id, r.cpg_count, f"{r.decision_value:.6f}", r.stage]
            )


def read_dmr_table(path) -> list:
    from .engine import DmrRecord

    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if tuple(header) != DMR_COLUMNS:
            raise ParseError(f"DMR table header must be {','.join(DMR_COLUMNS)}", row=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(DMR_COLUMNS):
                raise ParseError(f"expected {len(DMR_COLUMNS)} fields, found {len(row)}", row=lineno)
            try:
                records.append(
                    DmrRecord(
                        chromosome=row[0].strip(),
                        start_cpg_id=row[1].strip(),
                        end_cpg_id=row[2].strip(),
                        cpg_count=int(row[3]),
                        decision_value=float(row[4]),
                        stage=int(row[5]),
                    )
                )
            except ValueError as exc:
                raise ParseError(f"bad DMR record: {exc}", row=lineno) from None
    return records
