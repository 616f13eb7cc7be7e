"""Right-censored survival data container and CSV interchange.

The on-disk schema is one header row followed by numeric rows:

    f0,...,f{p-1},duration,event[,true_duration]

`duration` is the observed (possibly censored) positive time, `event` is 1
when the event was observed and 0 when the record is right-censored, and the
optional `true_duration` column carries the uncensored time when a simulator
knows it.  On read, every column other than duration/event/true_duration is
taken as a feature in file order, so externally exported tables only need
their duration and event columns renamed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

_RESERVED = ("duration", "event", "true_duration")


class DataFormatError(ValueError):
    """Raised when a table violates the survival-data schema."""


@dataclass(frozen=True)
class SurvivalRecord:
    """One observation: features, observed time, event flag, optional truth."""

    x: np.ndarray
    t_star: float
    d: int
    t_true: float | None = None


@dataclass
class Dataset:
    """Column-typed survival sample.

    Attributes:
        x: float array of shape (n, p).
        t_star: observed durations, shape (n,), strictly positive.
        d: event flags in {0, 1}, shape (n,).
        t_true: uncensored durations, shape (n,), or None when unknown.
        feature_names: p column labels, f0..f{p-1} by default.
    """

    x: np.ndarray
    t_star: np.ndarray
    d: np.ndarray
    t_true: np.ndarray | None = None
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.x.ndim == 1:
            self.x = self.x[:, None]
        self.t_star = np.asarray(self.t_star, dtype=float)
        self.d = np.asarray(self.d)
        n = self.x.shape[0]
        if self.t_star.shape != (n,) or self.d.shape != (n,):
            raise DataFormatError("column lengths disagree")
        if not np.all(np.isfinite(self.x)):
            raise DataFormatError("features must be finite")
        if not np.all(np.isfinite(self.t_star)) or np.any(self.t_star <= 0.0):
            raise DataFormatError("durations must be finite and positive")
        if not np.all(np.isin(self.d, (0, 1))):
            raise DataFormatError("event flags must be 0 or 1")
        self.d = self.d.astype(np.int64)
        if self.t_true is not None:
            self.t_true = np.asarray(self.t_true, dtype=float)
            if self.t_true.shape != (n,):
                raise DataFormatError("true_duration length disagrees")
            if not np.all(np.isfinite(self.t_true)) or np.any(self.t_true <= 0.0):
                raise DataFormatError("true durations must be finite and positive")
        if not self.feature_names:
            self.feature_names = [f"f{j}" for j in range(self.x.shape[1])]
        elif len(self.feature_names) != self.x.shape[1]:
            raise DataFormatError("feature_names length disagrees with x")

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def censor_rate(self) -> float:
        return float(1.0 - self.d.mean()) if len(self) else 0.0

    def record(self, i: int) -> SurvivalRecord:
        t_true = float(self.t_true[i]) if self.t_true is not None else None
        return SurvivalRecord(self.x[i].copy(), float(self.t_star[i]),
                              int(self.d[i]), t_true)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        if idx.size == 0:
            idx = idx.astype(np.intp)
        t_true = self.t_true[idx] if self.t_true is not None else None
        return Dataset(self.x[idx], self.t_star[idx], self.d[idx], t_true,
                       list(self.feature_names))


def write_csv(data: Dataset, path) -> None:
    """Write the dataset in the interchange schema, round-trip lossless."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = list(data.feature_names) + ["duration", "event"]
        if data.t_true is not None:
            header.append("true_duration")
        writer.writerow(header)
        for i in range(len(data)):
            row = [repr(float(v)) for v in data.x[i]]
            row.append(repr(float(data.t_star[i])))
            row.append(str(int(data.d[i])))
            if data.t_true is not None:
                row.append(repr(float(data.t_true[i])))
            writer.writerow(row)


def read_csv(path) -> Dataset:
    """Read a dataset written in the interchange schema.

    Raises DataFormatError on a missing duration/event column, non-numeric
    cells, ragged rows, non-binary event flags, or nonpositive durations.
    """
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty file") from None
        rows = list(reader)
    header = [c.strip() for c in header]
    if "duration" not in header:
        raise DataFormatError("missing duration column")
    if "event" not in header:
        raise DataFormatError("missing event column")
    feature_cols = [(j, c) for j, c in enumerate(header) if c not in _RESERVED]
    dur_j = header.index("duration")
    ev_j = header.index("event")
    true_j = header.index("true_duration") if "true_duration" in header else None

    ncol = len(header)
    n = len(rows)
    x = np.empty((n, len(feature_cols)))
    t_star = np.empty(n)
    d = np.empty(n, dtype=np.int64)
    t_true = np.empty(n) if true_j is not None else None
    for i, row in enumerate(rows):
        if len(row) != ncol:
            raise DataFormatError(f"row {i + 2}: expected {ncol} cells, got {len(row)}")
        try:
            for k, (j, _) in enumerate(feature_cols):
                x[i, k] = float(row[j])
            t_star[i] = float(row[dur_j])
            ev = float(row[ev_j])
            if t_true is not None:
                t_true[i] = float(row[true_j])
        except ValueError:
            raise DataFormatError(f"row {i + 2}: non-numeric cell") from None
        if ev not in (0.0, 1.0):
            raise DataFormatError(f"row {i + 2}: event must be 0 or 1")
        d[i] = int(ev)
    return Dataset(x, t_star, d, t_true, [c for _, c in feature_cols])
