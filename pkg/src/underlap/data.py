"""Dataset container and CSV readers/writers.

The on-disk format is plain comma-separated values with a header row; any
number of leading comment lines starting with '#' is allowed and ignored
on read.  Floats are serialized with 17 significant digits so that a
written file reads back bit-identically.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GroupDataset",
    "read_dataset",
    "write_dataset",
    "write_table",
    "read_table",
    "format_float",
    "write_mixture_draws",
    "write_conditional_draws",
]


def format_float(x) -> str:
    """17-significant-digit decimal form, enough to round-trip a double."""
    return format(float(x), ".17g")


@dataclass
class GroupDataset:
    """Biomarker outcomes, and optionally covariates, for one disease group.

    Covariate columns are float arrays for continuous covariates and
    object (string) arrays for categorical ones, all the same length as
    the outcomes.
    """

    label: str
    outcomes: np.ndarray
    covariates: dict = field(default_factory=dict)

    def __post_init__(self):
        self.outcomes = np.asarray(self.outcomes, dtype=float)
        if self.outcomes.ndim != 1 or self.outcomes.size == 0:
            raise ValueError(f"group {self.label!r} has no outcomes")
        if not np.all(np.isfinite(self.outcomes)):
            raise ValueError(f"group {self.label!r} has missing or non-finite outcomes")
        for name, col in self.covariates.items():
            arr = np.asarray(col)
            if arr.shape != self.outcomes.shape:
                raise ValueError(
                    f"covariate {name!r} in group {self.label!r} has length "
                    f"{arr.shape}, expected {self.outcomes.shape}"
                )
            self.covariates[name] = arr

    @property
    def n(self) -> int:
        return self.outcomes.size

    def records(self) -> list:
        """Covariate records as one mapping per observation."""
        names = list(self.covariates)
        return [
            {name: self.covariates[name][i] for name in names} for i in range(self.n)
        ]


def _parse_float(cell: str, row_number: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ValueError(
            f"row {row_number}: column {column!r} has non-numeric value {cell!r}"
        ) from None
    if not np.isfinite(value):
        raise ValueError(f"row {row_number}: column {column!r} is not finite ({cell!r})")
    return value


def read_dataset(path, group_col: str, outcome_col: str, covariate_cols=()) -> list:
    """Read a CSV of grouped outcomes into one GroupDataset per distinct
    group label, in label-sorted order.

    Row numbers in error messages are 1-based file lines (the header is
    line 1).  A covariate column becomes continuous if every cell parses
    as a number, categorical (strings) otherwise.
    """
    covariate_cols = list(covariate_cols)
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    for col in [group_col, outcome_col, *covariate_cols]:
        if col not in header:
            raise ValueError(f"{path}: missing required column {col!r}")
    gi = header.index(group_col)
    yi = header.index(outcome_col)
    ci = {c: header.index(c) for c in covariate_cols}

    by_group: dict = {}
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"row {line_no}: expected {len(header)} cells, got {len(row)}")
        label = row[gi].strip()
        if not label:
            raise ValueError(f"row {line_no}: empty group label")
        cell = row[yi].strip()
        if not cell:
            raise ValueError(f"row {line_no}: missing outcome in column {outcome_col!r}")
        y = _parse_float(cell, line_no, outcome_col)
        rec = {c: row[ci[c]].strip() for c in covariate_cols}
        for c, v in rec.items():
            if v == "":
                raise ValueError(f"row {line_no}: missing covariate {c!r}")
        by_group.setdefault(label, []).append((line_no, y, rec))

    datasets = []
    for label in sorted(by_group):
        entries = by_group[label]
        y = np.array([e[1] for e in entries])
        covs: dict = {}
        for c in covariate_cols:
            cells = [e[2][c] for e in entries]
            try:
                covs[c] = np.array(
                    [_parse_float(v, entries[i][0], c) for i, v in enumerate(cells)]
                )
            except ValueError:
                covs[c] = np.array(cells, dtype=object)
        datasets.append(GroupDataset(label, y, covs))
    return datasets


def write_dataset(path, datasets, group_col: str = "group", outcome_col: str = "y") -> None:
    """Write GroupDatasets back to CSV (inverse of :func:`read_dataset`)."""
    datasets = list(datasets)
    cov_names = list(datasets[0].covariates) if datasets else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([group_col, outcome_col, *cov_names])
        for ds in datasets:
            for i in range(ds.n):
                row = [ds.label, format_float(ds.outcomes[i])]
                for c in cov_names:
                    v = ds.covariates[c][i]
                    row.append(format_float(v) if isinstance(v, (int, float, np.floating)) else str(v))
                w.writerow(row)


def write_table(path, comment_lines, colnames, columns) -> None:
    """Write a CSV with '#' comment header lines; floats get 17 digits."""
    columns = [list(c) for c in columns]
    with open(path, "w", newline="") as fh:
        for line in comment_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(colnames)
        for row in zip(*columns):
            w.writerow(
                [format_float(v) if isinstance(v, (int, float, np.floating)) and not isinstance(v, bool) else str(v) for v in row]
            )


def read_table(path):
    """Read a CSV written by :func:`write_table`.

    Returns (comment_lines, colnames, columns) where columns is a dict of
    column name to list of raw strings.
    """
    comments = []
    with open(path, newline="") as fh:
        rows = []
        for raw in csv.reader(fh):
            if raw and raw[0].lstrip().startswith("#"):
                comments.append(",".join(raw).lstrip("# ").rstrip())
            elif raw:
                rows.append(raw)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    colnames = rows[0]
    columns = {c: [] for c in colnames}
    for row in rows[1:]:
        for c, v in zip(colnames, row):
            columns[c].append(v)
    return comments, colnames, columns


def write_mixture_draws(path, draws, comment_lines=()) -> None:
    """Audit CSV for unconditional mixture draws: one row per draw holding
    L weights, L means, L variances."""
    draws = list(draws)
    L = draws[0].weights.size
    colnames = (
        [f"w{l}" for l in range(L)]
        + [f"mu{l}" for l in range(L)]
        + [f"var{l}" for l in range(L)]
    )
    with open(path, "w", newline="") as fh:
        for line in comment_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(colnames)
        for d in draws:
            w.writerow([format_float(v) for v in (*d.weights, *d.means, *d.variances)])


def write_conditional_draws(path, fit, comment_lines=()) -> None:
    """Audit CSV for conditional mixture draws.

    The comment header describes the column blocks: gamma blocks (one per
    stick, dimension Q_v), beta blocks (one per component, dimension
    Q_mu), the variance block, and the standardization record.
    """
    draws = fit.draws
    model = fit.model
    L = draws[0].variances.size
    qv = draws[0].gamma.shape[1] if L > 1 else 0
    qu = draws[0].beta.shape[1]
    blocks = [
        f"gamma block: {L - 1} sticks x Q_v={qv} columns (standardized covariate scale)",
        f"beta block: {L} components x Q_mu={qu} columns (standardized scales)",
        f"variance block: {L} columns (standardized outcome scale)",
        "standardization: y = y_mean + y_sd * y_std; "
        + f"y_mean={format_float(model.y_mean)} y_sd={format_float(model.y_sd)}",
    ]
    for name, (m, s) in model.x_standardizers.items():
        blocks.append(
            f"covariate {name}: x_std = (x - {format_float(m)}) / {format_float(s)}"
        )
    colnames = (
        [f"gamma{l}_{j}" for l in range(L - 1) for j in range(qv)]
        + [f"beta{l}_{j}" for l in range(L) for j in range(qu)]
        + [f"var{l}" for l in range(L)]
    )
    with open(path, "w", newline="") as fh:
        for line in (*comment_lines, *blocks):
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(colnames)
        for d in draws:
            vals = [*d.gamma.ravel(), *d.beta.ravel(), *d.variances]
            w.writerow([format_float(v) for v in vals])
