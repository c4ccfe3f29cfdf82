"""Chain-output container, order statistics, the empirical CDF, and the
quantile point estimate shared by every interval method."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "InvalidInputError",
    "DegenerateDataError",
    "ScalarTrace",
    "QuantileSpec",
    "QuantileEstimate",
    "quantile_index",
    "order_statistic",
    "ecdf",
    "empirical_quantile",
    "read_trace_csv",
    "write_trace_csv",
]


class InvalidInputError(ValueError):
    """Raised when an argument violates a documented precondition."""


class DegenerateDataError(ValueError):
    """Raised when the data cannot support the requested computation
    (e.g. a constant trace under an automatic bandwidth rule)."""


class ScalarTrace:
    """Immutable 1-d sequence of real-valued functional evaluations from one
    chain run.  Values must be finite and there must be at least one."""

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.array(values, dtype=float)
        if arr.ndim != 1:
            raise InvalidInputError(f"trace must be 1-dimensional, got shape {arr.shape}")
        if arr.size < 1:
            raise InvalidInputError("trace must contain at least one value")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("trace values must be finite (no NaN or infinities)")
        arr.setflags(write=False)
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self) -> int:
        return self._values.size

    def __repr__(self) -> str:
        return f"ScalarTrace(n={len(self)})"


@dataclass(frozen=True)
class QuantileSpec:
    """Which quantile to estimate; q must lie strictly inside (0, 1)."""

    q: float

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise InvalidInputError(f"q must be in (0, 1), got {self.q}")


@dataclass(frozen=True)
class QuantileEstimate:
    """Point estimate with its asymptotic-variance estimate, MCSE and CI.

    ``method`` tags which variance construction produced it (BM, SBM or RS).
    ``details`` carries provenance (bandwidth, batch layout, tour count).
    """

    point: float
    method: str
    avar: float
    mcse: float
    ci_low: float
    ci_high: float
    confidence: float
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("BM", "SBM", "RS"):
            raise InvalidInputError(f"unknown method tag {self.method!r}")
        if self.avar < 0 or self.mcse < 0:
            raise InvalidInputError("avar and mcse must be nonnegative")
        if not (self.ci_low <= self.point <= self.ci_high):
            raise InvalidInputError("interval must contain the point estimate")

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)


def quantile_index(n: int, q: float) -> int:
    """1-based order-statistic rank j, the unique integer with j-1 < nq <= j."""
    j = math.ceil(n * q)
    return min(max(j, 1), n)


def order_statistic(trace: ScalarTrace, j: int) -> float:
    """Value of rank j (1-based, ascending).  Uses expected-linear selection
    rather than a full sort."""
    n = len(trace)
    if not 1 <= j <= n:
        raise InvalidInputError(f"rank {j} out of range for trace of length {n}")
    return float(np.partition(trace.values, j - 1)[j - 1])


def ecdf(trace: ScalarTrace, y: float) -> float:
    """Empirical CDF: fraction of trace values <= y."""
    return float(np.count_nonzero(trace.values <= y)) / len(trace)


def empirical_quantile(trace: ScalarTrace, spec: QuantileSpec) -> float:
    """Order-statistic quantile estimate at rank j with j-1 < nq <= j."""
    return order_statistic(trace, quantile_index(len(trace), spec.q))


# --- trace file format: CSV `index,value[,regen]`, >= 15 significant digits ---

def write_trace_csv(path, values, flags=None) -> None:
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if flags is None:
            writer.writerow(["index", "value"])
            for i, v in enumerate(values):
                writer.writerow([i, format(v, ".17g")])
        else:
            flags = np.asarray(flags, dtype=int)
            if flags.shape != values.shape:
                raise InvalidInputError("values and regen flags must have equal length")
            writer.writerow(["index", "value", "regen"])
            for i, (v, d) in enumerate(zip(values, flags)):
                writer.writerow([i, format(v, ".17g"), int(d)])


def read_trace_csv(path):
    """Read a trace CSV.  Returns (values, flags) where flags is None for the
    two-column format.  Malformed rows raise InvalidInputError with the line
    number."""
    values, flags = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2 or header[0].strip() != "index":
            raise InvalidInputError(f"{path}: line 1: expected header 'index,value[,regen]'")
        has_regen = len(header) >= 3 and header[2].strip() == "regen"
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                values.append(float(row[1]))
                if has_regen:
                    d = int(row[2])
                    if d not in (0, 1):
                        raise ValueError
                    flags.append(d)
            except (IndexError, ValueError):
                raise InvalidInputError(f"{path}: line {lineno}: malformed row {row!r}") from None
    if not values:
        raise InvalidInputError(f"{path}: no data rows")
    vals = np.asarray(values, dtype=float)
    return vals, (np.asarray(flags, dtype=np.int8) if has_regen else None)
