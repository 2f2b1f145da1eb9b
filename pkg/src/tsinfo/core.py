"""Time-series data model, delay embedding and sample alignment.

Time is indexed from 1 (``x_1 ... x_T``) in every public function of this
module; arrays are converted to 0-based offsets internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyAlignment, InvalidRequest, OutOfRange, ZeroVariance


def _frozen(values, dtype):
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """A complete, finite realization of one real-valued process."""

    values: np.ndarray
    name: str = "x"

    def __post_init__(self):
        arr = _frozen(self.values, float)
        if arr.ndim != 1:
            raise InvalidRequest(f"series {self.name!r} must be one-dimensional")
        if arr.size < 2:
            raise InvalidRequest(f"series {self.name!r} needs at least 2 points")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0]) + 1
            raise InvalidRequest(f"series {self.name!r} has a non-finite value at t={bad}")
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class DiscreteSeries:
    """Symbols from a finite alphabet ``{0, ..., alphabet_size - 1}``."""

    symbols: np.ndarray
    alphabet_size: int | None = None
    name: str = "x"

    def __post_init__(self):
        arr = np.asarray(self.symbols)
        if arr.ndim != 1 or arr.size < 2:
            raise InvalidRequest("discrete series must be 1-d with at least 2 symbols")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise InvalidRequest("discrete symbols must be integers")
        arr = _frozen(arr, np.int64)
        if arr.min() < 0:
            raise InvalidRequest("discrete symbols must be non-negative")
        size = int(arr.max()) + 1 if self.alphabet_size is None else int(self.alphabet_size)
        if arr.max() >= size:
            raise InvalidRequest(f"symbol {int(arr.max())} outside alphabet of size {size}")
        object.__setattr__(self, "symbols", arr)
        object.__setattr__(self, "alphabet_size", size)

    def __len__(self):
        return self.symbols.size

    def as_timeseries(self) -> TimeSeries:
        return TimeSeries(self.symbols.astype(float), self.name)


@dataclass(frozen=True)
class Dataset:
    """T x M table: one column per process, all of the same length."""

    columns: tuple[TimeSeries, ...]

    def __post_init__(self):
        cols = tuple(self.columns)
        if not cols:
            raise InvalidRequest("dataset needs at least one column")
        names = [c.name for c in cols]
        if len(set(names)) != len(names):
            raise InvalidRequest(f"column names must be unique, got {names}")
        lengths = {len(c) for c in cols}
        if len(lengths) != 1:
            raise InvalidRequest(f"columns have different lengths {sorted(lengths)}")
        object.__setattr__(self, "columns", cols)

    @classmethod
    def from_arrays(cls, arrays: Sequence, names: Sequence[str] | None = None) -> "Dataset":
        if names is None:
            names = [f"x{i + 1}" for i in range(len(arrays))]
        return cls(tuple(TimeSeries(a, n) for a, n in zip(arrays, names)))

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def T(self) -> int:
        return len(self.columns[0])

    def __getitem__(self, name: str) -> TimeSeries:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name):
        return any(c.name == name for c in self.columns)

    def to_matrix(self) -> np.ndarray:
        return np.column_stack([c.values for c in self.columns])


@dataclass(frozen=True)
class EmbeddingSpec:
    """Past-vector block ``(x_{t+lead}, x_{t+lead-tau}, ..., x_{t+lead-(k-1)tau})``.

    ``k = 0`` is the null block. ``lead = 0`` ends the block at the present
    index, ``lead = -1`` one step before it.
    """

    k: int = 1
    tau: int = 1
    lead: int = 0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise InvalidRequest(f"memory length k must be a non-negative integer, got {self.k}")
        if int(self.tau) != self.tau or self.tau < 1:
            raise InvalidRequest(f"lag tau must be a positive integer, got {self.tau}")
        if int(self.lead) != self.lead:
            raise InvalidRequest(f"lead must be an integer, got {self.lead}")

    @property
    def first_valid(self) -> int:
        """Smallest 1-based present index at which the block is defined."""
        if self.k == 0:
            return 1
        return max(1, 1 + (self.k - 1) * self.tau - self.lead)

    def last_valid(self, T: int) -> int:
        if self.k == 0:
            return T
        return min(T, T - self.lead)

    def offsets(self) -> np.ndarray:
        """Offsets from the present index, most recent first."""
        return self.lead - self.tau * np.arange(self.k)


def standardize(series: TimeSeries) -> TimeSeries:
    """Zero sample mean, unit sample standard deviation (ddof=1)."""
    v = series.values
    sd = v.std(ddof=1)
    if not sd > 0:
        raise ZeroVariance(f"series {series.name!r} has zero variance")
    return TimeSeries((v - v.mean()) / sd, series.name)


def embed(series: TimeSeries, spec: EmbeddingSpec, present_index: int) -> np.ndarray:
    T = len(series)
    idx = present_index + spec.offsets()
    if spec.k and (idx.min() < 1 or idx.max() > T):
        raise OutOfRange(
            f"embedding k={spec.k}, tau={spec.tau}, lead={spec.lead} at t={present_index} "
            f"needs indices {int(idx.min())}..{int(idx.max())}, outside 1..{T}"
        )
    return series.values[idx - 1]


@dataclass(frozen=True)
class AlignedSamples:
    """Joint samples of several embedded blocks on a shared set of present indices."""

    blocks: tuple[tuple[str, int], ...]
    rows: np.ndarray
    present_indices: np.ndarray
    _slices: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        start = 0
        for label, dim in self.blocks:
            self._slices[label] = slice(start, start + dim)
            start += dim

    @property
    def n_eff(self) -> int:
        return self.rows.shape[0]

    @property
    def labels(self) -> list[str]:
        return [b for b, _ in self.blocks]

    def dim(self, label: str) -> int:
        s = self._slices[label]
        return s.stop - s.start

    def block(self, label: str) -> np.ndarray:
        return self.rows[:, self._slices[label]]

    def select(self, labels: Iterable[str]) -> np.ndarray:
        """Columns of the given blocks, concatenated in block-declaration order."""
        wanted = set(labels)
        parts = [self.block(b) for b, _ in self.blocks if b in wanted]
        if not parts:
            return np.empty((self.n_eff, 0))
        return np.hstack(parts)


def align(dataset: Dataset, blocks: Sequence[tuple[str, EmbeddingSpec, str]]) -> AlignedSamples:
    """Stack every block at each present index where all of them are defined.

    ``blocks`` is a sequence of ``(column name, spec, label)``.
    """
    T = dataset.T
    labels = [b[2] for b in blocks]
    if len(set(labels)) != len(labels):
        raise InvalidRequest(f"block labels must be unique, got {labels}")
    for column, _, _ in blocks:
        if column not in dataset:
            raise InvalidRequest(f"unknown column {column!r}")

    start = max([spec.first_valid for _, spec, _ in blocks] + [1])
    stop = min([spec.last_valid(T) for _, spec, _ in blocks] + [T])
    if stop < start:
        desc = ", ".join(f"{lab}(k={s.k}, tau={s.tau}, lead={s.lead})" for _, s, lab in blocks)
        raise EmptyAlignment(f"no present index in 1..{T} defines all blocks: {desc}")

    present = np.arange(start, stop + 1)
    parts = []
    for column, spec, _ in blocks:
        values = dataset[column].values
        if spec.k == 0:
            parts.append(np.empty((present.size, 0)))
            continue
        idx = present[:, None] + spec.offsets()[None, :]
        parts.append(values[idx - 1])
    rows = np.hstack(parts) if parts else np.empty((present.size, 0))
    rows.setflags(write=False)
    present.setflags(write=False)
    return AlignedSamples(
        blocks=tuple((lab, spec.k) for _, spec, lab in blocks),
        rows=rows,
        present_indices=present,
    )
