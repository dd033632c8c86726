"""Approximate OLAP density queries over a stream of measured tuples.

A density query on dimension ``C`` asks for the share of the total measure
carried by each value of ``C``.  The estimator pushes tuples through a
weighted reservoir and reads the retained sample with unit measure: the
share of retained tuples holding value ``c`` is an unbiased estimate of the
measure share of ``c``.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

from .reservoir import InvalidMeasureError, Reservoir, WeightedItem
from .rng import RandomStream

OTHER = "__OTHER__"


class EmptyInputError(ValueError):
    pass


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class Tuple:
    dims: Mapping[str, Any]
    measure: float

    def __post_init__(self):
        m = self.measure
        if not (isinstance(m, (int, float)) and math.isfinite(m) and m > 0):
            raise InvalidMeasureError(f"tuple measure must be positive, got {m!r}")


@dataclass(frozen=True)
class DimensionSpec:
    """A categorical dimension.  ``name`` may list several columns joined by
    ``*``; the value is then the tuple of their values."""

    name: str
    values: tuple
    collect_other: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(dict.fromkeys(self.values)))
        if not self.values:
            raise SchemaError("a dimension needs at least one value")

    @property
    def cardinality(self) -> int:
        return len(self.values) + (1 if self.collect_other and OTHER not in self.values else 0)

    @property
    def columns(self) -> list[str]:
        return self.name.split("*")

    def value_of(self, t: Tuple):
        try:
            cols = self.columns
            v = t.dims[cols[0]] if len(cols) == 1 else tuple(t.dims[c] for c in cols)
        except KeyError as exc:
            raise SchemaError(f"tuple lacks dimension {exc.args[0]!r}") from None
        if v in self.values:
            return v
        if self.collect_other:
            return OTHER
        raise SchemaError(f"value {v!r} is not in dimension {self.name!r}")

    def keys(self) -> list:
        ks = list(self.values)
        if self.collect_other and OTHER not in ks:
            ks.append(OTHER)
        return ks


@dataclass
class DensityVector:
    dimension: DimensionSpec
    densities: dict
    sample_counts: dict = field(default_factory=dict)

    def __getitem__(self, value):
        return self.densities[value]

    def l1(self, other: "DensityVector") -> float:
        keys = set(self.densities) | set(other.densities)
        return sum(abs(self.densities.get(c, 0.0) - other.densities.get(c, 0.0)) for c in keys)

    def records(self) -> list[dict]:
        return [
            {"value": v, "density": self.densities[v], "sample_count": self.sample_counts.get(v)}
            for v in self.dimension.keys()
        ]


def exact_density(stream: Iterable[Tuple], dim: DimensionSpec) -> DensityVector:
    """Full-pass density: per-value measure over total measure."""
    sums = {v: 0.0 for v in dim.keys()}
    total = 0.0
    for t in stream:
        sums[dim.value_of(t)] += t.measure
        total += t.measure
    if total == 0:
        raise EmptyInputError("density of an empty stream is undefined")
    return DensityVector(dim, {v: s / total for v, s in sums.items()})


def estimate_density(stream: Iterable[Tuple], dim: DimensionSpec, k: int,
                     rng: RandomStream | int | None = None,
                     where: Callable[[Tuple], bool] | None = None,
                     eviction: str = "exact") -> DensityVector:
    """Reservoir estimate of the density vector.

    ``where`` filters tuples before they reach the reservoir.
    """
    if int(k) < 1:
        raise ValueError("k must be a positive integer")
    res = Reservoir(k, rng=rng, eviction=eviction)
    for t in stream:
        if where is not None and not where(t):
            continue
        res.offer(WeightedItem(dim.value_of(t), t.measure))
    sample = res.snapshot()
    if not sample:
        raise EmptyInputError("density of an empty stream is undefined")
    counts = Counter(sample)
    n = len(sample)
    keys = dim.keys()
    return DensityVector(dim, {v: counts.get(v, 0) / n for v in keys},
                         {v: counts.get(v, 0) for v in keys})


def required_sample_size(cardinality: int, epsilon: float, delta: float) -> int:
    """Smallest k with k >= 1/2 * (|C|/eps)^2 * ln(1/delta)."""
    if int(cardinality) < 1:
        raise ValueError("cardinality must be a positive integer")
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    bound = 0.5 * (cardinality / epsilon) ** 2 * math.log(1.0 / delta)
    k = math.ceil(bound)
    # guard against ceil landing one under through rounding of the bound
    return max(1, k if k >= bound else k + 1)


@dataclass(frozen=True)
class ApproximationBudget:
    epsilon: float
    delta: float
    required_k: int

    @classmethod
    def for_dimension(cls, dim: DimensionSpec, epsilon: float, delta: float) -> "ApproximationBudget":
        return cls(epsilon, delta, required_sample_size(dim.cardinality, epsilon, delta))


def read_tuples(path, measure: str, dims: Sequence[str] | None = None,
                delimiter: str = ",") -> Iterator[Tuple]:
    """Stream tuples from a delimited text file with a header row."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        if reader.fieldnames is None or measure not in reader.fieldnames:
            raise SchemaError(f"{path}: header has no measure column {measure!r}")
        for lineno, row in enumerate(reader, start=2):
            try:
                m = float(row[measure])
            except (TypeError, ValueError):
                raise SchemaError(f"{path}:{lineno}: bad measure {row[measure]!r}") from None
            keep = dims if dims is not None else [c for c in reader.fieldnames if c != measure]
            try:
                yield Tuple({c: row[c] for c in keep}, m)
            except InvalidMeasureError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None


def scan_values(path, column: str, delimiter: str = ",") -> tuple:
    """Distinct values of one or more ``*``-joined columns, in first-seen order."""
    cols = column.split("*")
    seen: dict = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh, delimiter=delimiter):
            try:
                v = row[cols[0]] if len(cols) == 1 else tuple(row[c] for c in cols)
            except KeyError as exc:
                raise SchemaError(f"{path}: no column {exc.args[0]!r}") from None
            seen.setdefault(v, None)
    return tuple(seen)
